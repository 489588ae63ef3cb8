use std::f64::consts::PI;

use serde::Serialize;

use super::{Claim, InequalityReport, SpectralData};
use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues;
use crate::majorize::IncreasingConvexFn;

/// `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn finish(
    report: InequalityReport,
    data: &SpectralData,
    body: impl FnOnce() -> Result<Outcome>,
) -> InequalityReport {
    match body() {
        Ok(Outcome::Sides(lhs, rhs, claim)) => report.evaluate(lhs, rhs, claim, data),
        Ok(Outcome::Skip(why)) => report.skipped(why),
        Err(e) => report.failed(e),
    }
}

enum Outcome {
    Sides(f64, f64, Claim),
    Skip(String),
}

fn positive(values: &[(usize, f64)], what: &str) -> Option<String> {
    values
        .iter()
        .find(|(_, v)| *v <= 0.0)
        .map(|(k, _)| format!("{what}_{k} is a zero mode"))
}

fn require_positive(n: usize, name: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput(format!("{name} must be positive")));
    }
    Ok(())
}

/// `σ_2 L ≤ 2π` on simply connected planar domains.
pub fn check_weinstock(data: &SpectralData) -> InequalityReport {
    let r = InequalityReport::new("weinstock", "σ_2 L ≤ 2π", data);
    finish(r, data, || {
        data.require_simply_connected()?;
        data.require_planar()?;
        Ok(Outcome::Sides(data.sigma_at(2)? * data.length, 2.0 * PI, Claim::AtMost))
    })
}

/// `σ_{p+1} σ_{q+1} L² ≤ (p+q)²π²` for even `p+q`, `(p+q−1)²π²` for odd.
pub fn check_hps_product(data: &SpectralData, p: usize, q: usize) -> InequalityReport {
    let r = InequalityReport::new(
        "hps_product",
        "σ_{p+1} σ_{q+1} L² ≤ (p+q)²π² (p+q even), (p+q−1)²π² (p+q odd)",
        data,
    )
    .param("p", p)
    .param("q", q);
    finish(r, data, || {
        require_positive(p, "p")?;
        require_positive(q, "q")?;
        data.require_simply_connected()?;
        data.require_planar()?;
        let lhs = data.sigma_at(p + 1)? * data.sigma_at(q + 1)? * data.length.powi(2);
        let k = if (p + q) % 2 == 0 { p + q } else { p + q - 1 } as f64;
        Ok(Outcome::Sides(lhs, k * k * PI * PI, Claim::AtMost))
    })
}

/// `σ_{p+1} L ≤ 2pπ`.
pub fn check_hps_linear(data: &SpectralData, p: usize) -> InequalityReport {
    let r = InequalityReport::new("hps_linear", "σ_{p+1} L ≤ 2pπ", data).param("p", p);
    finish(r, data, || {
        require_positive(p, "p")?;
        data.require_simply_connected()?;
        data.require_planar()?;
        Ok(Outcome::Sides(
            data.sigma_at(p + 1)? * data.length,
            2.0 * p as f64 * PI,
            Claim::AtMost,
        ))
    })
}

/// `Σ_{i=2}^{2n+1} 1/σ_i ≥ (L/π) Σ_{i=1}^n 1/i`.
pub fn check_hps_inverse_trace(data: &SpectralData, n: usize) -> InequalityReport {
    let r = InequalityReport::new("hps_inverse_trace", "Σ_{i=2}^{2n+1} 1/σ_i ≥ (L/π) Σ_{i=1}^n 1/i", data)
        .param("n", n);
    finish(r, data, || {
        require_positive(n, "n")?;
        data.require_simply_connected()?;
        let mut lhs = 0.0;
        for i in 2..=2 * n + 1 {
            lhs += 1.0 / data.sigma_at(i)?;
        }
        let h: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
        Ok(Outcome::Sides(lhs, data.length / PI * h, Claim::AtLeast))
    })
}

/// `Σ_{i=2}^{2n+1} 1/σ_i² ≥ (L²/2π²) Σ_{i=1}^n 1/i²`.
pub fn check_dittmar(data: &SpectralData, n: usize) -> InequalityReport {
    let r = InequalityReport::new("dittmar", "Σ_{i=2}^{2n+1} 1/σ_i² ≥ (L²/2π²) Σ_{i=1}^n 1/i²", data)
        .param("n", n);
    finish(r, data, || {
        require_positive(n, "n")?;
        data.require_simply_connected()?;
        let mut lhs = 0.0;
        for i in 2..=2 * n + 1 {
            lhs += data.sigma_at(i)?.powi(-2);
        }
        let h: f64 = (1..=n).map(|i| (i as f64).powi(-2)).sum();
        Ok(Outcome::Sides(lhs, data.length.powi(2) / (2.0 * PI * PI) * h, Claim::AtLeast))
    })
}

/// Partial sums `Σ_{i=2}^{k} 1/σ_i²` for `k ≤ terms + 1` against the limit
/// `L²/12`. Reported as a trend only.
pub fn check_dittmar_trend(data: &SpectralData, terms: usize) -> InequalityReport {
    let mut r = InequalityReport::new("dittmar_trend", "Σ_{i≥2} 1/σ_i² ≥ L²/12", data).param("terms", terms);
    let mut sums = Vec::new();
    let mut acc = 0.0;
    for i in 2..=terms + 1 {
        match data.sigma_at(i) {
            Ok(s) => {
                acc += s.powi(-2);
                sums.push(acc);
            }
            Err(e) => return r.failed(e),
        }
    }
    if let Err(e) = data.require_simply_connected() {
        return r.failed(e);
    }
    let limit = data.length.powi(2) / 12.0;
    let increasing = sums.windows(2).all(|w| w[1] >= w[0]);
    let tol = data.policy.tolerance(limit, data.h);
    let below = sums.iter().all(|&s| s <= limit + tol);
    r = r
        .param("partial_sums", &sums)
        .param("increasing", increasing)
        .param("below_limit", below);
    r.lhs = acc;
    r.rhs = limit;
    r.slack = acc - limit;
    r.tol = tol;
    r.verdict = super::Verdict::Trend;
    r
}

/// `Σ_{i=1}^{2n} f(1/σ_{m+i}) ≥ 2 Σ_{i=1}^n f(λ_{b1+2m+2i−2}^{−1/2})`.
pub fn check_thm11(data: &SpectralData, m: usize, n: usize, f: &IncreasingConvexFn) -> InequalityReport {
    let r = InequalityReport::new(
        "thm11",
        "Σ_{i=1}^{2n} f(1/σ_{m+i}) ≥ 2 Σ_{i=1}^n f(λ_{b1+2m+2i−2}^{−1/2})",
        data,
    )
    .param("m", m)
    .param("n", n)
    .param("f", f.name())
    .param("b1", data.b1);
    finish(r, data, || {
        require_positive(m, "m")?;
        require_positive(n, "n")?;
        let sig: Vec<(usize, f64)> = (1..=2 * n)
            .map(|i| Ok((m + i, data.sigma_at(m + i)?)))
            .collect::<Result<_>>()?;
        let lam: Vec<(usize, f64)> = (1..=n)
            .map(|i| {
                let k = data.b1 + 2 * m + 2 * i - 2;
                Ok((k, data.lambda_at(k)?))
            })
            .collect::<Result<_>>()?;
        if let Some(why) = positive(&sig, "σ").or_else(|| positive(&lam, "λ")) {
            return Ok(Outcome::Skip(why));
        }
        let lhs = sig.iter().map(|(_, s)| f.eval(1.0 / s)).sum();
        let rhs = 2.0 * lam.iter().map(|(_, l)| f.eval(l.sqrt().recip())).sum::<f64>();
        Ok(Outcome::Sides(lhs, rhs, Claim::AtLeast))
    })
}

/// Both two-index inequalities on surfaces, where the conjugate forms are
/// functions and the lower Betti shift is `b0`:
///
/// 1. `Σ f(1/σ_{r+i}) + Σ f(1/σ_{b0+s+i−1}) ≥ 2 Σ f(λ_{b1+r+s+i−1}^{−1/2})`
/// 2. `Σ f(1/(σ_{r+i} σ_{b0+s+i−1})) ≥ Σ f(1/λ_{b1+r+s+i−1})`
pub fn check_thm12(
    data: &SpectralData,
    r: usize,
    s: usize,
    m: usize,
    f: &IncreasingConvexFn,
    statement: u8,
) -> InequalityReport {
    let anchor = if statement == 1 {
        "Σ f(1/σ_{r+i}) + Σ f(1/σ_{b0+s+i−1}) ≥ 2 Σ f(λ_{b1+r+s+i−1}^{−1/2})"
    } else {
        "Σ f(1/(σ_{r+i} σ_{b0+s+i−1})) ≥ Σ f(1/λ_{b1+r+s+i−1})"
    };
    let rep = InequalityReport::new("thm12", anchor, data)
        .param("r", r)
        .param("s", s)
        .param("m", m)
        .param("f", f.name())
        .param("statement", statement)
        .param("b1", data.b1);
    finish(rep, data, || {
        require_positive(r, "r")?;
        require_positive(s, "s")?;
        require_positive(m, "m")?;
        if statement != 1 && statement != 2 {
            return Err(Error::InvalidInput(format!("statement must be 1 or 2, got {statement}")));
        }
        let mut terms = Vec::new();
        for i in 1..=m {
            let a = r + i;
            let b = data.b0 + s + i - 1;
            let k = data.b1 + r + s + i - 1;
            terms.push(((a, data.sigma_at(a)?), (b, data.sigma_at(b)?), (k, data.lambda_at(k)?)));
        }
        let sig: Vec<(usize, f64)> = terms.iter().flat_map(|t| [t.0, t.1]).collect();
        let lam: Vec<(usize, f64)> = terms.iter().map(|t| t.2).collect();
        if let Some(why) = positive(&sig, "σ").or_else(|| positive(&lam, "λ")) {
            return Ok(Outcome::Skip(why));
        }
        let (lhs, rhs) = if statement == 1 {
            let lhs = terms
                .iter()
                .map(|t| f.eval(1.0 / t.0 .1) + f.eval(1.0 / t.1 .1))
                .sum();
            let rhs = 2.0 * terms.iter().map(|t| f.eval(t.2 .1.sqrt().recip())).sum::<f64>();
            (lhs, rhs)
        } else {
            let lhs = terms.iter().map(|t| f.eval(1.0 / (t.0 .1 * t.1 .1))).sum();
            let rhs = terms.iter().map(|t| f.eval(1.0 / t.2 .1)).sum();
            (lhs, rhs)
        };
        Ok(Outcome::Sides(lhs, rhs, Claim::AtLeast))
    })
}

/// Orthonormal coordinate coframe of the plane and the form-space
/// dimensions built on it.
#[derive(Debug, Clone, Serialize)]
pub struct ParallelFormFrame {
    pub coframe: [[f64; 2]; 2],
    pub m: usize,
    pub p: usize,
    /// `C(m, p+1)`.
    pub dim_top: usize,
    /// `C(m−1, p)`.
    pub dim_trace: usize,
}

impl ParallelFormFrame {
    pub fn planar(p: usize) -> Result<Self> {
        if p > 1 {
            return Err(Error::OutOfScope(format!("p = {p} exceeds the planar range 0..=1")));
        }
        Ok(Self {
            coframe: [[1.0, 0.0], [0.0, 1.0]],
            m: 2,
            p,
            dim_top: binomial(2, p + 1),
            dim_trace: binomial(1, p),
        })
    }

    pub fn is_orthonormal(&self) -> bool {
        let c = self.coframe;
        (0..2).all(|i| {
            (0..2).all(|j| {
                let d: f64 = (0..2).map(|k| c[i][k] * c[j][k]).sum();
                (d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15
            })
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixApReport {
    pub frame: ParallelFormFrame,
    /// `(1/Vol M) ∫_{∂M} ⟨i_ν ξ_i, i_ν ξ_j⟩` over the coframe basis.
    pub matrix: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    /// `C(m−1, p) Vol(∂M)/Vol(M)`.
    pub trace_identity: f64,
    pub trace_gap: f64,
    /// `σ^{(p)}_{b_p+i} ≤ λ_i(A)`.
    pub bounds: Vec<InequalityReport>,
}

fn sigma_p(data: &SpectralData, p: usize, k: usize) -> Result<f64> {
    match p {
        0 => data.sigma_at(k),
        1 => data.sigma1_at(k),
        _ => Err(Error::OutOfScope(format!("p = {p}"))),
    }
}

fn betti(data: &SpectralData, p: usize) -> usize {
    if p == 0 {
        data.b0
    } else {
        data.b1
    }
}

/// The matrix of boundary normal-contraction integrals on `∧^{p+1}` of the
/// coordinate coframe, its eigenvalues, the trace identity and the bounds
/// `σ^{(p)}_{b_p+i} ≤ λ_i`.
pub fn matrix_a_p(data: &SpectralData, p: usize) -> Result<MatrixApReport> {
    data.require_planar()?;
    let frame = ParallelFormFrame::planar(p)?;
    let nint = data
        .normal_integrals
        .ok_or_else(|| Error::OutOfScope("normal integrals unavailable".into()))?;
    let matrix: Vec<Vec<f64>> = if p == 0 {
        (0..2).map(|i| (0..2).map(|j| nint[i][j] / data.area).collect()).collect()
    } else {
        // i_ν (dx∧dy) = ν_1 dy − ν_2 dx has unit length
        vec![vec![(nint[0][0] + nint[1][1]) / data.area]]
    };
    let n = matrix.len();
    let eigenvalues = sym_eigenvalues(&nalgebra::DMatrix::from_fn(n, n, |i, j| matrix[i][j]))?;
    let trace: f64 = (0..n).map(|i| matrix[i][i]).sum();
    let trace_identity = frame.dim_trace as f64 * data.length / data.area;
    let bp = betti(data, p);
    let bounds = eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &ev)| {
            let i = k + 1;
            let r = InequalityReport::new("matrix_a_p", "σ^{(p)}_{b_p+i} ≤ λ_i(A^{(p+1)})", data)
                .param("p", p)
                .param("i", i);
            finish(r, data, || Ok(Outcome::Sides(sigma_p(data, p, bp + i)?, ev, Claim::AtMost)))
        })
        .collect();
    Ok(MatrixApReport {
        trace_gap: (trace - trace_identity).abs(),
        frame,
        matrix,
        eigenvalues,
        trace,
        trace_identity,
        bounds,
    })
}

/// `Σ_{i=1}^{C(2,p+1)} σ^{(p)}_{b_p+i} ≤ C(1,p) L/A` on planar domains.
pub fn check_thm13_cor52(data: &SpectralData, p: usize) -> InequalityReport {
    let r = InequalityReport::new(
        "thm13_cor52",
        "Σ_{i=1}^{C(n,p+1)} σ^{(p)}_{b_p+i} ≤ C(n−1,p) Vol(∂Ω)/Vol(Ω)",
        data,
    )
    .param("p", p);
    finish(r, data, || {
        data.require_planar()?;
        let frame = ParallelFormFrame::planar(p)?;
        let bp = betti(data, p);
        let mut lhs = 0.0;
        for i in 1..=frame.dim_top {
            lhs += sigma_p(data, p, bp + i)?;
        }
        Ok(Outcome::Sides(
            lhs,
            frame.dim_trace as f64 * data.length / data.area,
            Claim::AtMost,
        ))
    })
}

/// `σ^{(p)}_{b_p+i} ≤ C(1,p)/(C(2,p+1)+1−i) · L/A`.
pub fn check_cor51(data: &SpectralData, p: usize, i: usize) -> InequalityReport {
    let r = InequalityReport::new(
        "cor51",
        "σ^{(p)}_{b_p+i} ≤ C(m−1,p)/(C(m,p+1)+1−i) · Vol(∂M)/Vol(M)",
        data,
    )
    .param("p", p)
    .param("i", i);
    finish(r, data, || {
        data.require_planar()?;
        let frame = ParallelFormFrame::planar(p)?;
        if i == 0 || i > frame.dim_top {
            return Err(Error::InvalidInput(format!("i must lie in 1..={}", frame.dim_top)));
        }
        let coeff = frame.dim_trace as f64 / (frame.dim_top + 1 - i) as f64;
        Ok(Outcome::Sides(
            sigma_p(data, p, betti(data, p) + i)?,
            coeff * data.length / data.area,
            Claim::AtMost,
        ))
    })
}

/// `Σ_{i=1}^{C(2,p+1)} 1/σ^{(p)}_{b_p+i} ≥ 2 C(2,p+1) A / ((p+1) L)`.
pub fn check_brock_remark(data: &SpectralData, p: usize) -> InequalityReport {
    let r = InequalityReport::new(
        "brock_remark",
        "Σ_{i=1}^{C(n,p+1)} 1/σ^{(p)}_{b_p+i} ≥ n C(n,p+1) Vol(Ω)/((p+1) Vol(∂Ω))",
        data,
    )
    .param("p", p);
    finish(r, data, || {
        data.require_planar()?;
        let frame = ParallelFormFrame::planar(p)?;
        let bp = betti(data, p);
        let mut vals = Vec::new();
        for i in 1..=frame.dim_top {
            vals.push((bp + i, sigma_p(data, p, bp + i)?));
        }
        if let Some(why) = positive(&vals, "σ") {
            return Ok(Outcome::Skip(why));
        }
        let lhs = vals.iter().map(|(_, s)| 1.0 / s).sum();
        let rhs = 2.0 * frame.dim_top as f64 * data.area / ((p + 1) as f64 * data.length);
        Ok(Outcome::Sides(lhs, rhs, Claim::AtLeast))
    })
}
