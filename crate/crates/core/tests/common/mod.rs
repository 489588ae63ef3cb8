//! Oracles shared by the integration tests. None of them call into the crate.
#![allow(dead_code)]

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Steklov eigenvalues of functions on the annulus `rho < r < big_r`, from the
/// 2×2 problem of each Fourier mode.
///
/// Mode `k ≥ 1` uses `u = a r^k + b r^{−k}` (twice, for cos and sin); mode 0
/// uses `u = a + b log r`. With `M` mapping `(a, b)` to the boundary values
/// and `N` to the outward normal derivatives, `σ` are the eigenvalues of
/// `N M⁻¹`.
pub fn annulus_steklov(rho: f64, big_r: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..=count {
        let (m, n) = if k == 0 {
            (
                [[1.0, rho.ln()], [1.0, big_r.ln()]],
                [[0.0, -1.0 / rho], [0.0, 1.0 / big_r]],
            )
        } else {
            let kf = k as f64;
            (
                [[rho.powf(kf), rho.powf(-kf)], [big_r.powf(kf), big_r.powf(-kf)]],
                [
                    [-kf * rho.powf(kf - 1.0), kf * rho.powf(-kf - 1.0)],
                    [kf * big_r.powf(kf - 1.0), -kf * big_r.powf(-kf - 1.0)],
                ],
            )
        };
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let mut t = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                t[i][j] = n[i][0] * inv[0][j] + n[i][1] * inv[1][j];
            }
        }
        let tr = t[0][0] + t[1][1];
        let dt = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        let disc = (tr * tr / 4.0 - dt).max(0.0).sqrt();
        for s in [tr / 2.0 - disc, tr / 2.0 + disc] {
            let s = if s.abs() < 1e-13 { 0.0 } else { s };
            out.push(s);
            if k > 0 {
                out.push(s);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.truncate(count);
    out
}

/// Steklov eigenvalues of 1-forms on the disk of radius `radius` from the
/// radial ODE system, integrated with classical RK4.
///
/// With `ω = f(r) cos kθ dr + g(r) sin kθ r dθ` harmonic and tangential,
/// `f'' + f'/r − (k²+1) f/r² − 2k g/r² = 0` and the same with `f ↔ g`.
/// The boundary condition is `f(1) = 0` and `σ = 1 + g'(1)/g(1)` on the
/// unit disk. Each `k ≥ 1` contributes two modes, `k = 0` one.
pub fn disk_1form_ode(radius: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while out.len() < count {
        let s = ode_mode(k);
        out.push(s / radius);
        if k > 0 {
            out.push(s / radius);
        }
        k += 1;
    }
    out.sort_by(f64::total_cmp);
    out.truncate(count);
    out
}

fn ode_rhs(k: f64, r: f64, y: [f64; 4]) -> [f64; 4] {
    let [f, fp, g, gp] = y;
    let r2 = r * r;
    [
        fp,
        -fp / r + (k * k + 1.0) * f / r2 + 2.0 * k * g / r2,
        gp,
        -gp / r + (k * k + 1.0) * g / r2 + 2.0 * k * f / r2,
    ]
}

fn integrate(k: f64, r0: f64, y0: [f64; 4], steps: usize) -> [f64; 4] {
    let h = (1.0 - r0) / steps as f64;
    let mut y = y0;
    let mut r = r0;
    let add = |y: [f64; 4], d: [f64; 4], s: f64| [y[0] + s * d[0], y[1] + s * d[1], y[2] + s * d[2], y[3] + s * d[3]];
    for _ in 0..steps {
        let k1 = ode_rhs(k, r, y);
        let k2 = ode_rhs(k, r + h / 2.0, add(y, k1, h / 2.0));
        let k3 = ode_rhs(k, r + h / 2.0, add(y, k2, h / 2.0));
        let k4 = ode_rhs(k, r + h, add(y, k3, h));
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += h;
    }
    y
}

fn ode_mode(k: usize) -> f64 {
    let kf = k as f64;
    let r0: f64 = 1e-2;
    // Regular starts: f + g behaves like r^{k+1}, f − g like r^{|k−1|}.
    let (p, q) = (kf + 1.0, (kf - 1.0).abs());
    let plus = [
        0.5 * r0.powf(p),
        0.5 * p * r0.powf(p - 1.0),
        0.5 * r0.powf(p),
        0.5 * p * r0.powf(p - 1.0),
    ];
    let dq = if q == 0.0 { 0.0 } else { q * r0.powf(q - 1.0) };
    let minus = [0.5 * r0.powf(q), 0.5 * dq, -0.5 * r0.powf(q), -0.5 * dq];
    let a = integrate(kf, r0, plus, 40_000);
    let b = integrate(kf, r0, minus, 40_000);
    let (alpha, beta) = (b[0], -a[0]);
    let g = alpha * a[2] + beta * b[2];
    let gp = alpha * a[3] + beta * b[3];
    1.0 + gp / g
}
