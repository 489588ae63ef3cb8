//! Closed-form spectra of the disk, the annulus and the circle.

use std::f64::consts::PI;

use super::{Provenance, Spectrum, SpectrumKind};

fn analytic(kind: SpectrumKind, values: Vec<f64>, zero_modes: usize) -> Spectrum {
    Spectrum {
        kind,
        provenance: Provenance::Analytic,
        values,
        zero_modes,
        dofs: Vec::new(),
        eigenvectors: None,
    }
}

/// `0, 1, 1, 2, 2, …` divided by the radius.
pub fn disk_steklov_analytic(radius: f64, count: usize) -> Spectrum {
    let values = (0..count).map(|i| ((i + 1) / 2) as f64 / radius).collect();
    analytic(SpectrumKind::Steklov0, values, 1)
}

/// Steklov spectrum of 1-forms on the disk: `2, 2, 2, 3, 3, 4, 4, …` divided
/// by the radius. Fourier mode `j` contributes `|j| + 1` for `j ≠ 0` and `2`
/// for `j = 0`.
pub fn disk_steklov_1form_analytic(radius: f64, count: usize) -> Spectrum {
    let mut values = vec![2.0];
    let mut j = 1;
    while values.len() < count {
        values.extend([(j + 1) as f64; 2]);
        j += 1;
    }
    values.truncate(count);
    let values = values.into_iter().map(|v| v / radius).collect();
    analytic(SpectrumKind::Steklov1, values, 0)
}

/// The two Steklov eigenvalues of Fourier mode `k` on the annulus
/// `r_in < r < r_out`, ascending.
///
/// Harmonic functions of the mode are spanned by `{1, log r}` (`k = 0`) or
/// `{r^k, r^{-k}}`; the Dirichlet energy and boundary mass restricted to that
/// span form a 2×2 pencil whose characteristic quadratic is solved directly.
pub fn annulus_steklov_mode(r_in: f64, r_out: f64, k: usize) -> [f64; 2] {
    let kf = k as f64;
    // basis values and radial derivatives at r, scaled to stay O(1)
    let basis = |r: f64| -> [(f64, f64); 2] {
        if k == 0 {
            [(1.0, 0.0), ((r / r_in).ln(), 1.0 / r)]
        } else {
            let f1 = (r / r_out).powi(k as i32);
            let f2 = (r_in / r).powi(k as i32);
            [(f1, kf * f1 / r), (f2, -kf * f2 / r)]
        }
    };
    let (fo, fi) = (basis(r_out), basis(r_in));
    let mut e = [[0.0; 2]; 2];
    let mut b = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            // outward normal derivative is +∂_r outside and −∂_r inside
            e[i][j] = r_out * fo[i].0 * fo[j].1 - r_in * fi[i].0 * fi[j].1;
            b[i][j] = r_out * fo[i].0 * fo[j].0 + r_in * fi[i].0 * fi[j].0;
        }
    }
    let e12 = 0.5 * (e[0][1] + e[1][0]);
    let qa = b[0][0] * b[1][1] - b[0][1] * b[0][1];
    let qb = -(e[0][0] * b[1][1] + e[1][1] * b[0][0] - 2.0 * e12 * b[0][1]);
    let qc = e[0][0] * e[1][1] - e12 * e12;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / qa, qc / q) };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    [lo.max(0.0), hi]
}

/// Steklov spectrum of functions on the annulus `r_in < |x| < r_out`.
pub fn annulus_steklov_analytic(r_in: f64, r_out: f64, count: usize) -> Spectrum {
    let mut values = Vec::new();
    let mut k = 0;
    loop {
        let [lo, hi] = annulus_steklov_mode(r_in, r_out, k);
        let mult = if k == 0 { 1 } else { 2 };
        if values.len() >= count {
            values.sort_by(f64::total_cmp);
            // lower branch grows with k; stop once it clears the count-th value
            if lo > values[count - 1] {
                break;
            }
        }
        for _ in 0..mult {
            values.push(lo);
            values.push(hi);
        }
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    values.sort_by(f64::total_cmp);
    values.truncate(count);
    if let Some(v) = values.first_mut() {
        *v = 0.0;
    }
    analytic(SpectrumKind::Steklov0, values, 1)
}

/// Laplace spectrum of a circle of the given length: `0` then
/// `(2πk/L)²` twice for each `k ≥ 1`.
pub fn circle_laplace_analytic(length: f64, count: usize) -> Spectrum {
    circles_laplace_analytic(&[length], count)
}

/// Sorted union of the Laplace spectra of several circles.
pub fn circles_laplace_analytic(lengths: &[f64], count: usize) -> Spectrum {
    let mut values = Vec::with_capacity(lengths.len() * count);
    for &len in lengths {
        values.extend((0..count).map(|i| {
            let k = ((i + 1) / 2) as f64;
            (2.0 * PI * k / len).powi(2)
        }));
    }
    values.sort_by(f64::total_cmp);
    values.truncate(count);
    analytic(SpectrumKind::BoundaryLaplace, values, lengths.len())
}
