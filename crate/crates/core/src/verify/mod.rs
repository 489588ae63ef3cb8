//! Inequality harness: both sides of each trace and inverse-trace bound on
//! analytic or finite-element spectra, with a tolerance model and reports.

mod checks;
mod convergence;
mod suite;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Shape};
use crate::spectra::{
    annulus_steklov_analytic, boundary_laplace, circles_laplace_analytic, disk_steklov_1form_analytic,
    disk_steklov_analytic, steklov_1forms_planar, steklov_functions, Spectrum,
};

pub use checks::{
    binomial, check_brock_remark, check_cor51, check_dittmar, check_dittmar_trend, check_hps_inverse_trace,
    check_hps_linear, check_hps_product, check_thm11, check_thm12, check_thm13_cor52, check_weinstock,
    matrix_a_p, MatrixApReport, ParallelFormFrame,
};
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceTable, Quantity};
pub use suite::{run_suite, CheckKind, DomainSpec, Source, SuiteConfig, SuiteResult, Summary};

/// Outcome of one inequality instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Violated,
    HypothesisViolation,
    OutOfScope,
    /// An index touched a zero mode, so `1/σ` or `1/λ` is undefined.
    Skipped,
    /// Partial-sum report of an infinite series; never pass/fail.
    Trend,
    Error,
}

/// Direction of the claim `lhs ≤ rhs` or `lhs ≥ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub anchor: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub lhs: f64,
    pub rhs: f64,
    /// Nonnegative when the claim holds exactly.
    pub slack: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub domain: String,
    /// Mesh size, `None` for analytic spectra.
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl InequalityReport {
    pub(crate) fn new(name: &str, anchor: &str, data: &SpectralData) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            params: BTreeMap::new(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            tol: f64::NAN,
            verdict: Verdict::Error,
            domain: data.domain.clone(),
            h: data.h,
            note: String::new(),
        }
    }

    pub(crate) fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params
            .insert(key.into(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    /// Fills both sides and the verdict under the data's tolerance policy.
    pub(crate) fn evaluate(mut self, lhs: f64, rhs: f64, claim: Claim, data: &SpectralData) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self.slack = match claim {
            Claim::AtMost => rhs - lhs,
            Claim::AtLeast => lhs - rhs,
        };
        self.tol = data.policy.tolerance(rhs, data.h);
        self.verdict = if self.slack >= -self.tol {
            Verdict::Verified
        } else {
            Verdict::Violated
        };
        self
    }

    pub(crate) fn failed(mut self, err: Error) -> Self {
        self.verdict = match err {
            Error::HypothesisViolation(_) => Verdict::HypothesisViolation,
            Error::OutOfScope(_) | Error::NotPlanar => Verdict::OutOfScope,
            _ => Verdict::Error,
        };
        self.note = err.to_string();
        self
    }

    pub(crate) fn skipped(mut self, why: String) -> Self {
        self.verdict = Verdict::Skipped;
        self.note = why;
        self
    }

    /// Flips the claim direction; used by the negative control.
    pub fn inverted(mut self) -> Self {
        if matches!(self.verdict, Verdict::Verified | Verdict::Violated) {
            self.slack = -self.slack;
            self.verdict = if self.slack >= -self.tol {
                Verdict::Verified
            } else {
                Verdict::Violated
            };
            self.note = "claim inverted (negative control)".into();
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Verified
    }
}

/// Tolerance model: `analytic_rel·|rhs|` for closed-form spectra,
/// `min(c_tol·h², max_rel)·|rhs|` for finite-element spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TolerancePolicy {
    pub analytic_rel: f64,
    pub c_tol: f64,
    pub max_rel: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            analytic_rel: 1e-9,
            c_tol: 10.0,
            max_rel: 0.05,
        }
    }
}

impl TolerancePolicy {
    pub fn tolerance(&self, rhs: f64, h: Option<f64>) -> f64 {
        match h {
            None => self.analytic_rel * rhs.abs(),
            Some(h) => (self.c_tol * h * h).min(self.max_rel) * rhs.abs(),
        }
    }
}

/// Spectra and measures of one domain, analytic or computed on a mesh.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub domain: String,
    pub h: Option<f64>,
    pub b0: usize,
    pub b1: usize,
    pub loops: usize,
    pub planar: bool,
    pub area: f64,
    pub length: f64,
    /// `σ^{(0)}_1, σ^{(0)}_2, …`
    pub sigma: Vec<f64>,
    /// Merged boundary Laplace spectrum `λ_1, λ_2, …`.
    pub lambda: Vec<f64>,
    /// `σ^{(1)}_1, …` when available.
    pub sigma1: Option<Vec<f64>>,
    /// `∫_{∂M} ν_i ν_j` for planar domains.
    pub normal_integrals: Option<[[f64; 2]; 2]>,
    pub policy: TolerancePolicy,
}

/// Spectrum lengths requested for finite-element data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumCounts {
    pub sigma: usize,
    pub lambda: usize,
    /// Zero disables the 1-form solve.
    pub sigma1: usize,
}

impl Default for SpectrumCounts {
    fn default() -> Self {
        Self {
            sigma: 40,
            lambda: 24,
            sigma1: 4,
        }
    }
}

impl SpectralData {
    /// Closed-form spectra of the disk of radius `radius`.
    pub fn analytic_disk(radius: f64, count: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
        let length = 2.0 * PI * radius;
        let n = PI * radius;
        Ok(Self {
            domain: Shape::Disk { radius }.label(),
            h: None,
            b0: 1,
            b1: 0,
            loops: 1,
            planar: true,
            area: PI * radius * radius,
            length,
            sigma: disk_steklov_analytic(radius, count).values,
            lambda: circles_laplace_analytic(&[length], count).values,
            sigma1: Some(disk_steklov_1form_analytic(radius, count).values),
            normal_integrals: Some([[n, 0.0], [0.0, n]]),
            policy: TolerancePolicy::default(),
        })
    }

    /// Closed-form spectra of the annulus `inner < |x| < outer`. The 1-form
    /// spectrum has no closed form here and is left out.
    pub fn analytic_annulus(inner: f64, outer: f64, count: usize) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::InvalidInput("annulus needs 0 < inner < outer".into()));
        }
        let n = PI * (inner + outer);
        Ok(Self {
            domain: Shape::Annulus { inner, outer }.label(),
            h: None,
            b0: 1,
            b1: 1,
            loops: 2,
            planar: true,
            area: PI * (outer * outer - inner * inner),
            length: 2.0 * PI * (inner + outer),
            sigma: annulus_steklov_analytic(inner, outer, count).values,
            lambda: circles_laplace_analytic(&[2.0 * PI * inner, 2.0 * PI * outer], count).values,
            sigma1: None,
            normal_integrals: Some([[n, 0.0], [0.0, n]]),
            policy: TolerancePolicy::default(),
        })
    }

    /// Finite-element spectra on `mesh`. Counts are capped by the available
    /// boundary degrees of freedom.
    pub fn from_mesh(mesh: &Mesh, counts: SpectrumCounts) -> Result<Self> {
        let topo = mesh.topology();
        let nb = mesh.boundary_vertices().len();
        let sigma = steklov_functions(mesh, counts.sigma.min(nb))?;
        let lambda = boundary_laplace(mesh, counts.lambda.min(nb))?;
        check_zero_modes(&sigma, topo.b0)?;
        check_zero_modes(&lambda, topo.boundary_component_count)?;
        let planar = mesh.is_planar();
        let sigma1 = if planar && counts.sigma1 > 0 {
            let s1 = steklov_1forms_planar(mesh, counts.sigma1.min(nb))?;
            check_zero_modes(&s1, topo.b1)?;
            Some(s1.values)
        } else {
            None
        };
        let measures = mesh.measures();
        Ok(Self {
            domain: mesh.shape().label(),
            h: Some(mesh.max_edge_length()),
            b0: topo.b0,
            b1: topo.b1,
            loops: topo.boundary_component_count,
            planar,
            area: measures.area,
            length: measures.boundary_length,
            sigma: sigma.values,
            lambda: lambda.values,
            sigma1,
            normal_integrals: planar.then(|| normal_integrals(mesh)),
            policy: TolerancePolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: TolerancePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn is_analytic(&self) -> bool {
        self.h.is_none()
    }

    pub(crate) fn sigma_at(&self, k: usize) -> Result<f64> {
        at(&self.sigma, k)
    }

    pub(crate) fn lambda_at(&self, k: usize) -> Result<f64> {
        at(&self.lambda, k)
    }

    pub(crate) fn sigma1_at(&self, k: usize) -> Result<f64> {
        match &self.sigma1 {
            Some(s) => at(s, k),
            None => Err(Error::OutOfScope("no 1-form spectrum for this domain".into())),
        }
    }

    pub(crate) fn require_simply_connected(&self) -> Result<()> {
        if self.b0 != 1 || self.b1 != 0 {
            return Err(Error::HypothesisViolation(format!(
                "domain must be simply connected (b0 = {}, b1 = {})",
                self.b0, self.b1
            )));
        }
        Ok(())
    }

    pub(crate) fn require_planar(&self) -> Result<()> {
        if !self.planar {
            return Err(Error::OutOfScope("only planar Euclidean domains".into()));
        }
        Ok(())
    }
}

fn at(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > values.len() {
        return Err(Error::CountTooLarge {
            requested: k,
            available: values.len(),
        });
    }
    Ok(values[k - 1])
}

fn check_zero_modes(s: &Spectrum, expected: usize) -> Result<()> {
    if s.zero_modes != expected {
        return Err(Error::ZeroModeMismatch {
            kind: s.kind.label().into(),
            expected,
            found: s.zero_modes,
        });
    }
    Ok(())
}

/// `∫_{∂M} ν_i ν_j` summed over boundary segments, with the outward normal
/// the clockwise rotation of the loop tangent.
pub fn normal_integrals(mesh: &Mesh) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    let p = mesh.vertices();
    for lp in mesh.boundary_loops() {
        for k in 0..lp.len() {
            let (a, b) = (p[lp[k]], p[lp[(k + 1) % lp.len()]]);
            let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
            let len = tx.hypot(ty);
            let nu = [ty / len, -tx / len];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] += len * nu[i] * nu[j];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_annulus, generate_disk};

    #[test]
    fn tolerance_policy() {
        let p = TolerancePolicy::default();
        assert_eq!(p.tolerance(2.0, None), 2e-9);
        assert!((p.tolerance(1.0, Some(0.01)) - 1e-3).abs() < 1e-15);
        assert_eq!(p.tolerance(1.0, Some(1.0)), 0.05);
    }

    #[test]
    fn normal_integrals_of_disk() {
        let m = generate_disk(1.0, 0.05).unwrap();
        let n = normal_integrals(&m);
        let len = m.measures().boundary_length;
        assert!((n[0][0] + n[1][1] - len).abs() < 1e-12);
        assert!((n[0][0] - PI).abs() < 1e-2);
        assert!(n[0][1].abs() < 1e-10);
    }

    #[test]
    fn mesh_data_zero_modes() {
        let m = generate_annulus(0.5, 1.0, 0.15).unwrap();
        let d = SpectralData::from_mesh(&m, SpectrumCounts::default()).unwrap();
        assert_eq!((d.b0, d.b1, d.loops), (1, 1, 2));
        assert_eq!(d.lambda[1], 0.0);
        assert_eq!(d.sigma1.as_ref().unwrap()[0], 0.0);
    }

    #[test]
    fn report_verdicts() {
        let d = SpectralData::analytic_disk(1.0, 8).unwrap();
        let r = InequalityReport::new("x", "a ≤ b", &d).evaluate(1.0, 1.0, Claim::AtMost, &d);
        assert_eq!(r.verdict, Verdict::Verified);
        let r = InequalityReport::new("x", "a ≤ b", &d).evaluate(1.0, 0.9, Claim::AtMost, &d);
        assert_eq!(r.verdict, Verdict::Violated);
        let r = InequalityReport::new("x", "a ≤ b", &d).evaluate(0.5, 1.0, Claim::AtMost, &d);
        assert_eq!(r.inverted().verdict, Verdict::Violated);
    }
}
