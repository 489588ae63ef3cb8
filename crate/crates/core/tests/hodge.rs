use std::f64::consts::PI;

use steklov_core::fem::{interpolate, mass_boundary, stiffness_scalar};
use steklov_core::hodge::*;
use steklov_core::mesh::*;
use steklov_core::Error;

fn re_im_zk(k: i32) -> (impl Fn(f64, f64, f64) -> f64, impl Fn(f64, f64, f64) -> f64) {
    (
        move |x: f64, y: f64, _| x.hypot(y).powi(k) * (k as f64 * y.atan2(x)).cos(),
        move |x: f64, y: f64, _| x.hypot(y).powi(k) * (k as f64 * y.atan2(x)).sin(),
    )
}

fn boundary_data(m: &Mesh, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    m.boundary_vertices()
        .iter()
        .map(|&v| {
            let p = m.vertices()[v];
            f(p[0], p[1], p[2])
        })
        .collect()
}

#[test]
fn extension_reproduces_constants_and_linears() {
    for m in [generate_disk(1.0, 0.1).unwrap(), generate_annulus(0.5, 1.0, 0.1).unwrap()] {
        let one = harmonic_extension(&m, &vec![1.0; m.boundary_vertices().len()]).unwrap();
        assert!(one.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let u = harmonic_extension(&m, &boundary_data(&m, |x, y, _| 2.0 * x - 3.0 * y)).unwrap();
        let exact = interpolate(&m, |x, y, _| 2.0 * x - 3.0 * y);
        for (a, b) in u.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10);
        }
    }
    let m = generate_disk(1.0, 0.1).unwrap();
    assert!(matches!(harmonic_extension(&m, &[1.0, 2.0]), Err(Error::DimensionMismatch(_))));
}

#[test]
fn cosine_extension_energy_converges() {
    let mut gaps = Vec::new();
    for h in [0.1, 0.05] {
        let m = generate_disk(1.0, h).unwrap();
        let u = harmonic_extension(&m, &boundary_data(&m, |x, y, _| y.atan2(x).cos())).unwrap();
        let e = stiffness_scalar(&m).unwrap().quad(&u);
        let hh = m.max_edge_length();
        assert!((e - PI).abs() <= 2.0 * hh * hh, "h={h} energy {e}");
        gaps.push((e - PI).abs());
    }
    assert!(gaps[1] < gaps[0]);
}

#[test]
fn harmonic_fields() {
    assert!(harmonic_neumann_fields(&generate_disk(1.0, 0.1).unwrap()).unwrap().is_empty());
    let m = generate_annulus(0.5, 1.0, 0.05).unwrap();
    let basis = harmonic_neumann_fields(&m).unwrap();
    assert_eq!(basis.len(), 1);
    assert!(basis.d_residual[0] <= 1e-8);
    assert!(basis.coderivative_residual[0] <= 1e-8);
    assert!(basis.normal_trace_residual[0] <= 1e-8);
    let inner = m
        .boundary_loops()
        .iter()
        .position(|l| {
            let p = m.vertices()[l[0]];
            p[0].hypot(p[1]) < 0.75
        })
        .unwrap();
    assert!(basis.periods[0][inner].abs() > 1e-3);
}

#[test]
fn conjugate_of_x_is_y() {
    let m = generate_rectangle(1.0, 1.0, 0.1).unwrap();
    let x = interpolate(&m, |x, _, _| x);
    let pair = conjugate_harmonic(&m, &x, 1e-8).unwrap();
    assert!(pair.residual <= 1e-10);
    let y = interpolate(&m, |_, y, _| y);
    let shift = pair.v[0] - y[0];
    for (a, b) in pair.v.iter().zip(&y) {
        assert!((a - b - shift).abs() < 1e-10);
    }
}

#[test]
fn conjugate_of_re_zk_approaches_im_zk() {
    for k in [2, 3] {
        let mut residuals = Vec::new();
        for h in [0.1, 0.05] {
            let m = generate_disk(1.0, h).unwrap();
            let (re, im) = re_im_zk(k);
            let u = harmonic_extension(&m, &boundary_data(&m, re)).unwrap();
            let pair = conjugate_harmonic(&m, &u, 1e-6).unwrap();
            let exact = interpolate(&m, im);
            let n = exact.len() as f64;
            let shift = pair.v.iter().zip(&exact).map(|(a, b)| a - b).sum::<f64>() / n;
            let err = pair
                .v
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b - shift).abs())
                .fold(0.0, f64::max);
            assert!(err < 0.1 * k as f64 * m.max_edge_length(), "k={k} h={h} err={err}");
            residuals.push(pair.relative_residual);
        }
        // O(h): halving h at least roughly halves the residual.
        assert!(residuals[1] < 0.7 * residuals[0], "{residuals:?}");
    }
}

#[test]
fn log_r_on_annulus_is_obstructed() {
    let m = generate_annulus(0.5, 1.0, 0.1).unwrap();
    let u = harmonic_extension(&m, &boundary_data(&m, |x, y, _| x.hypot(y).ln())).unwrap();
    let err = conjugate_harmonic(&m, &u, 1e-6).unwrap_err();
    assert!(matches!(err, Error::PeriodObstruction { .. }));
    assert!(err.to_string().contains("period obstruction"));
    // ∮ *d(log r) around the inner circle is 2π.
    let solver = ConjugateSolver::new(&m).unwrap();
    let periods = solver.periods(&m, &u);
    assert_eq!(periods.len(), 1);
    assert!(periods[0].abs() > 1e-2);
}

#[test]
fn proof_subspace_orthogonality_and_index_shift() {
    let disk = generate_disk(1.0, 0.1).unwrap();
    let annulus = generate_annulus(0.5, 1.0, 0.1).unwrap();
    let d = build_proof_subspace(&disk, 1, 1).unwrap();
    let a = build_proof_subspace(&annulus, 1, 1).unwrap();
    assert_eq!(a.pairs[0].top_index, d.pairs[0].top_index + 1);
    assert_eq!(a.pairs[0].coefficients.len(), d.pairs[0].coefficients.len() + 1);
    for sub in [&d, &a, &build_proof_subspace(&disk, 2, 2).unwrap()] {
        assert_eq!(sub.functions.len(), 2 * sub.n);
        assert!(sub.max_offdiag_energy <= 1e-6);
        // Recompute the energy Gram from the stored functions.
        let m = if sub.b1 == 0 { &disk } else { &annulus };
        let k = stiffness_scalar(m).unwrap();
        for i in 0..sub.functions.len() {
            for j in 0..sub.functions.len() {
                let e = k.form(&sub.functions[i], &sub.functions[j]);
                let scale = (k.quad(&sub.functions[i]) * k.quad(&sub.functions[j])).sqrt();
                if i != j {
                    assert!(e.abs() <= 1e-6 * scale);
                }
            }
        }
    }
}

#[test]
fn matrix_a_bounds_on_the_disk() {
    let m = generate_disk(1.0, 0.05).unwrap();
    let sub = build_proof_subspace(&m, 1, 1).unwrap();
    let rep = matrix_a(&sub).unwrap();
    assert!(rep.bounds_hold());
    for b in &rep.bounds {
        assert!(b.sigma <= b.eigenvalue * (1.0 + 1e-8));
    }
    let h = m.max_edge_length();
    for d in &rep.diagonal {
        assert!(d.product >= d.bound * (1.0 - 10.0 * h * h), "{d:?}");
    }
}

#[test]
fn one_function_matrix_is_the_rayleigh_quotient() {
    let m = generate_disk(1.0, 0.1).unwrap();
    let mut sub = build_proof_subspace(&m, 1, 1).unwrap();
    sub.functions.truncate(1);
    sub.energy_gram = vec![vec![sub.energy_gram[0][0]]];
    sub.boundary_gram = vec![vec![sub.boundary_gram[0][0]]];
    sub.tangential_energy.truncate(1);
    sub.pairs.clear();
    let rep = matrix_a(&sub).unwrap();
    assert_eq!(rep.eigenvalues.len(), 1);
    let u = &sub.functions[0];
    let rq = stiffness_scalar(&m).unwrap().quad(u) / mass_boundary(&m).quad(u);
    assert!((rep.eigenvalues[0] - rq).abs() < 1e-10 * rq);
}

#[test]
fn second_construction_isometry_and_bounds() {
    for m in [generate_disk(1.0, 0.1).unwrap(), generate_annulus(0.5, 1.0, 0.1).unwrap()] {
        let rep = matrices_a_b_thm12(&m, 1, 1, 1).unwrap();
        assert!(rep.bounds_hold());
        assert!(rep.isometry_error <= 1e-6);
    }
}
