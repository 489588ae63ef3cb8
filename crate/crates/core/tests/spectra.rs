mod common;

use common::{annulus_steklov, disk_1form_ode, rel};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov_core::mesh::*;
use steklov_core::spectra::*;

#[test]
fn ode_oracle_self_consistency() {
    let v = disk_1form_ode(1.0, 7);
    let expected = [2.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0];
    for (a, b) in v.iter().zip(expected) {
        assert!((a - b).abs() < 1e-9, "{v:?}");
    }
    assert!((disk_1form_ode(2.0, 1)[0] - 1.0).abs() < 1e-9);
}

#[test]
fn annulus_oracle_matches_closed_form_module() {
    let ours = annulus_steklov(0.5, 1.0, 12);
    let theirs = annulus_steklov_analytic(0.5, 1.0, 12).values;
    for (a, b) in ours.iter().zip(&theirs) {
        assert!((a - b).abs() < 1e-12 * (1.0 + b), "{ours:?} vs {theirs:?}");
    }
    // Mode 0 with u = a + b log r: σ = 0 or (1/ρ + 1/R)/log(R/ρ).
    let nonzero_mode0 = (2.0 + 1.0) / 2f64.ln();
    assert!(ours.iter().any(|s| (s - nonzero_mode0).abs() < 1e-12));
}

#[test]
fn disk_steklov_against_separation_of_variables() {
    let m = generate_disk(1.0, 0.02).unwrap();
    let s = steklov_functions(&m, 8).unwrap();
    assert_eq!(s.zero_modes, 1);
    let expected = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0];
    assert!(s.values[0].abs() < 1e-10);
    for (v, e) in s.values.iter().zip(expected).skip(1) {
        assert!(rel(*v, e) < 1e-3, "{:?}", s.values);
    }
}

#[test]
fn annulus_steklov_against_mode_oracle() {
    let m = generate_annulus(0.5, 1.0, 0.02).unwrap();
    let s = steklov_functions(&m, 6).unwrap();
    let oracle = annulus_steklov(0.5, 1.0, 6);
    assert!(s.values[0].abs() < 1e-10);
    for (v, e) in s.values.iter().zip(&oracle).skip(1) {
        assert!(rel(*v, *e) < 1e-3, "{:?} vs {oracle:?}", s.values);
    }
}

#[test]
fn steklov_scales_inversely_with_length() {
    let m = generate_disk(1.0, 0.1).unwrap();
    let big = m.scaled(2.0).unwrap();
    let a = steklov_functions(&m, 6).unwrap();
    let b = steklov_functions(&big, 6).unwrap();
    for (x, y) in a.values.iter().zip(&b.values).skip(1) {
        assert!(rel(*y, x / 2.0) < 1e-9);
    }
}

#[test]
fn disk_one_forms_against_radial_ode() {
    let m = generate_disk(1.0, 0.02).unwrap();
    let s = steklov_1forms_planar(&m, 5).unwrap();
    assert_eq!(s.zero_modes, 0);
    let oracle = disk_1form_ode(1.0, 5);
    for (v, e) in s.values.iter().zip(&oracle) {
        assert!(rel(*v, *e) < 1e-3, "{:?} vs {oracle:?}", s.values);
    }
    // Perimeter over area bounds the first 1-form eigenvalue.
    let bound = m.measures().boundary_length / m.measures().area;
    assert!(s.values[0] <= bound);
}

#[test]
fn annulus_one_forms_have_one_harmonic_field() {
    let m = generate_annulus(0.5, 1.0, 0.1).unwrap();
    let s = steklov_1forms_planar(&m, 3).unwrap();
    assert_eq!(s.zero_modes, 1);
    assert!(s.values[0].abs() < 1e-8);
    assert!(s.values[1] > 0.1);
}

#[test]
fn circle_boundary_spectrum() {
    let m = generate_disk(1.0, 0.02).unwrap();
    let s = boundary_laplace(&m, 7).unwrap();
    assert_eq!(s.zero_modes, 1);
    let expected = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0];
    assert!(s.values[0].abs() < 1e-10);
    for (v, e) in s.values.iter().zip(expected).skip(1) {
        assert!(rel(*v, e) < 1e-3, "{:?}", s.values);
    }
}

#[test]
fn annulus_boundary_spectrum_is_a_union_of_circles() {
    let m = generate_annulus(0.5, 1.0, 0.02).unwrap();
    let s = boundary_laplace(&m, 8).unwrap();
    assert_eq!(s.zero_modes, 2);
    // Lengths 2π and π: j² from the outer circle, (2j)² from the inner one.
    let expected = [0.0, 0.0, 1.0, 1.0, 4.0, 4.0, 4.0, 4.0];
    for (v, e) in s.values.iter().zip(expected) {
        if e == 0.0 {
            assert!(v.abs() < 1e-10);
        } else {
            assert!(rel(*v, e) < 1e-3, "{:?}", s.values);
        }
    }
}

#[test]
fn closed_forms() {
    assert_eq!(disk_steklov_analytic(1.0, 5).values, vec![0.0, 1.0, 1.0, 2.0, 2.0]);
    let c = circle_laplace_analytic(2.0 * std::f64::consts::PI, 5).values;
    for (a, b) in c.iter().zip([0.0, 1.0, 1.0, 4.0, 4.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn generalized_eigenproblem_basics() {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
    let id = DMatrix::identity(3, 3);
    assert_eq!(generalized_sym_eig(&a, &id, 3).unwrap().values, vec![1.0, 2.0, 3.0]);
    let b = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
    for v in generalized_sym_eig(&b, &b, 3).unwrap().values {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &g * g.transpose() + DMatrix::identity(n, n) * 0.1
}

#[test]
fn random_pencils_against_dense_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let a = random_spd(&mut rng, 6);
        let b = random_spd(&mut rng, 6);
        let e = generalized_sym_eig(&a, &b, 6).unwrap();
        // trace(B⁻¹A) and det(B⁻¹A) through an LU solve.
        let c = b.clone().lu().solve(&a).unwrap();
        let scale = e.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!((c.trace() - e.values.iter().sum::<f64>()).abs() < 1e-10 * scale * 6.0);
        let det: f64 = e.values.iter().product();
        assert!(rel(det, c.determinant()) < 1e-9);
        for (k, &lam) in e.values.iter().enumerate() {
            let x = e.vectors.column(k);
            let r = &a * x - (&b * x) * lam;
            assert!(r.norm() < 1e-10 * (a.norm() + lam.abs() * b.norm()));
            let singular = (&a - &b * lam).determinant() / (a.norm() + lam * b.norm()).powi(6);
            assert!(singular.abs() < 1e-10);
        }
        let gram = e.vectors.transpose() * &b * &e.vectors;
        assert!((gram - DMatrix::identity(6, 6)).abs().max() < 1e-10);
    }
}
