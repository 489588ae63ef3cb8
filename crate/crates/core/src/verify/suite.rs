use std::path::PathBuf;

use serde::Serialize;

use super::checks::*;
use super::convergence::{convergence_study, ConvergenceTable, Quantity};
use super::{InequalityReport, SpectralData, SpectrumCounts, TolerancePolicy, Verdict};
use crate::error::{Error, Result};
use crate::majorize::IncreasingConvexFn;
use crate::mesh::{generate_shape, load_mesh, Shape};

/// Where a domain's spectra come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Fem { h: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainSpec {
    pub shape: Shape,
    pub source: Source,
}

impl DomainSpec {
    pub fn analytic(shape: Shape) -> Self {
        Self {
            shape,
            source: Source::Analytic,
        }
    }

    pub fn fem(shape: Shape, h: f64) -> Self {
        Self {
            shape,
            source: Source::Fem { h },
        }
    }

    /// Spectral data of the domain scaled by `scale`.
    pub fn data(&self, counts: SpectrumCounts, scale: f64) -> Result<SpectralData> {
        match (&self.source, self.shape.scaled(scale)) {
            (Source::Analytic, Shape::Disk { radius }) => SpectralData::analytic_disk(radius, counts.sigma),
            (Source::Analytic, Shape::Annulus { inner, outer }) => {
                SpectralData::analytic_annulus(inner, outer, counts.sigma)
            }
            (Source::Analytic, other) => Err(Error::OutOfScope(format!(
                "no closed-form spectra for {}",
                other.label()
            ))),
            (Source::Fem { h }, _) => {
                let mesh = generate_shape(&self.shape, *h)?.scaled(scale)?;
                SpectralData::from_mesh(&mesh, counts)
            }
            (Source::File { path }, _) => {
                let mesh = load_mesh(path)?.scaled(scale)?;
                SpectralData::from_mesh(&mesh, counts)
            }
        }
    }

    pub fn label(&self) -> String {
        match &self.source {
            Source::Analytic => format!("{} analytic", self.shape.label()),
            Source::Fem { h } => format!("{} h={h}", self.shape.label()),
            Source::File { path } => format!("mesh {}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Weinstock,
    HpsProduct,
    HpsLinear,
    HpsInverseTrace,
    Dittmar,
    DittmarTrend,
    Thm11,
    Thm12,
    MatrixAP,
    Thm13Cor52,
    Cor51,
    BrockRemark,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        CheckKind::Weinstock,
        CheckKind::HpsProduct,
        CheckKind::HpsLinear,
        CheckKind::HpsInverseTrace,
        CheckKind::Dittmar,
        CheckKind::DittmarTrend,
        CheckKind::Thm11,
        CheckKind::Thm12,
        CheckKind::MatrixAP,
        CheckKind::Thm13Cor52,
        CheckKind::Cor51,
        CheckKind::BrockRemark,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Weinstock => "weinstock",
            CheckKind::HpsProduct => "hps_product",
            CheckKind::HpsLinear => "hps_linear",
            CheckKind::HpsInverseTrace => "hps_inverse_trace",
            CheckKind::Dittmar => "dittmar",
            CheckKind::DittmarTrend => "dittmar_trend",
            CheckKind::Thm11 => "thm11",
            CheckKind::Thm12 => "thm12",
            CheckKind::MatrixAP => "matrix_a_p",
            CheckKind::Thm13Cor52 => "thm13_cor52",
            CheckKind::Cor51 => "cor51",
            CheckKind::BrockRemark => "brock_remark",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = match s {
            "thm13" | "cor52" => "thm13_cor52",
            "brock" => "brock_remark",
            other => other,
        };
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown check '{s}'")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub domains: Vec<DomainSpec>,
    pub checks: Vec<CheckKind>,
    pub functions: Vec<IncreasingConvexFn>,
    pub m_max: usize,
    pub n_max: usize,
    pub r_max: usize,
    pub s_max: usize,
    /// Upper end of `p`, `q` in the product and linear bounds.
    pub pq_max: usize,
    pub trend_terms: usize,
    pub counts: SpectrumCounts,
    pub policy: TolerancePolicy,
    /// Every domain is scaled by this factor before evaluation.
    pub scale: f64,
    /// Negative control: inverts every claim.
    pub self_test: bool,
    pub convergence: Vec<(Shape, Quantity)>,
    pub convergence_base_h: f64,
    pub convergence_levels: usize,
    /// Worker threads for independent domains; reports keep configuration order.
    pub threads: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let disk = Shape::Disk { radius: 1.0 };
        let annulus = Shape::Annulus { inner: 0.5, outer: 1.0 };
        Self {
            domains: vec![
                DomainSpec::analytic(disk.clone()),
                DomainSpec::analytic(annulus.clone()),
                DomainSpec::fem(disk.clone(), 0.05),
                DomainSpec::fem(annulus.clone(), 0.05),
                DomainSpec::fem(Shape::Ellipse { a: 2.0, b: 1.0 }, 0.05),
            ],
            checks: CheckKind::ALL.to_vec(),
            functions: vec![
                IncreasingConvexFn::identity(),
                IncreasingConvexFn::square(),
                IncreasingConvexFn::exp_minus_one(),
            ],
            m_max: 2,
            n_max: 3,
            r_max: 3,
            s_max: 3,
            pq_max: 4,
            trend_terms: 30,
            counts: SpectrumCounts::default(),
            policy: TolerancePolicy::default(),
            scale: 1.0,
            self_test: false,
            convergence: vec![
                (disk.clone(), Quantity::Sigma(2)),
                (disk, Quantity::Lambda(2)),
                (annulus, Quantity::Sigma(2)),
            ],
            convergence_base_h: 0.1,
            convergence_levels: 3,
            threads: 1,
        }
    }
}

impl SuiteConfig {
    /// Largest Steklov and boundary Laplace indices any enabled check reads.
    pub fn required_counts(&self) -> (usize, usize) {
        let b1 = 1;
        let mut sigma = 3;
        let mut lambda = 1;
        for c in &self.checks {
            match c {
                CheckKind::HpsProduct | CheckKind::HpsLinear => sigma = sigma.max(self.pq_max + 1),
                CheckKind::HpsInverseTrace | CheckKind::Dittmar => sigma = sigma.max(2 * self.n_max + 1),
                CheckKind::DittmarTrend => sigma = sigma.max(self.trend_terms + 1),
                CheckKind::Thm11 => {
                    sigma = sigma.max(self.m_max + 2 * self.n_max);
                    lambda = lambda.max(b1 + 2 * self.m_max + 2 * self.n_max - 2);
                }
                CheckKind::Thm12 => {
                    sigma = sigma.max(self.r_max.max(self.s_max) + self.m_max);
                    lambda = lambda.max(b1 + self.r_max + self.s_max + self.m_max - 1);
                }
                _ => {}
            }
        }
        (sigma, lambda)
    }

    /// Rejects configurations whose index caps exceed the requested
    /// spectrum lengths.
    pub fn validate(&self) -> Result<()> {
        let (s, l) = self.required_counts();
        if s > self.counts.sigma || l > self.counts.lambda {
            return Err(Error::InvalidInput(format!(
                "checks need {s} Steklov and {l} boundary eigenvalues, counts are {} and {}",
                self.counts.sigma, self.counts.lambda
            )));
        }
        if !(self.scale > 0.0) {
            return Err(Error::InvalidInput("scale must be positive".into()));
        }
        if self.functions.is_empty() {
            return Err(Error::InvalidInput("at least one function is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub verified: usize,
    pub violated: usize,
    pub errored: usize,
    pub hypothesis_violation: usize,
    pub out_of_scope: usize,
    pub skipped: usize,
    pub trend: usize,
}

impl Summary {
    fn of(reports: &[InequalityReport]) -> Self {
        let mut s = Summary {
            total: reports.len(),
            ..Default::default()
        };
        for r in reports {
            match r.verdict {
                Verdict::Verified => s.verified += 1,
                Verdict::Violated => s.violated += 1,
                Verdict::Error => s.errored += 1,
                Verdict::HypothesisViolation => s.hypothesis_violation += 1,
                Verdict::OutOfScope => s.out_of_scope += 1,
                Verdict::Skipped => s.skipped += 1,
                Verdict::Trend => s.trend += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub reports: Vec<InequalityReport>,
    pub summary: Summary,
    pub convergence: Vec<ConvergenceTable>,
    /// Convergence studies that failed, with the error text.
    pub convergence_errors: Vec<String>,
}

impl SuiteResult {
    /// Wraps reports produced outside `run_suite`.
    pub fn from_reports(reports: Vec<InequalityReport>) -> Self {
        Self {
            summary: Summary::of(&reports),
            reports,
            convergence: Vec::new(),
            convergence_errors: Vec::new(),
        }
    }

    pub fn has_violations(&self) -> bool {
        self.summary.violated > 0
    }

    pub fn reports_json(&self) -> String {
        serde_json::to_string_pretty(&self.reports).expect("serializable reports")
    }

    pub fn reports_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "anchor", "params", "lhs", "rhs", "slack", "tol", "verdict", "domain", "h", "note"])
            .expect("in-memory write");
        for r in &self.reports {
            let verdict = serde_json::to_value(r.verdict).expect("serializable");
            w.write_record([
                r.name.clone(),
                r.anchor.clone(),
                serde_json::to_string(&r.params).expect("serializable"),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.slack.to_string(),
                r.tol.to_string(),
                verdict.as_str().unwrap_or_default().to_string(),
                r.domain.clone(),
                r.h.map(|h| h.to_string()).unwrap_or_default(),
                r.note.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// All parameter instances of one check kind on one domain.
pub fn expand_check(kind: CheckKind, data: &SpectralData, cfg: &SuiteConfig) -> Vec<InequalityReport> {
    let mut out = Vec::new();
    match kind {
        CheckKind::Weinstock => out.push(check_weinstock(data)),
        CheckKind::HpsProduct => {
            for p in 1..=cfg.pq_max {
                for q in 1..=cfg.pq_max {
                    out.push(check_hps_product(data, p, q));
                }
            }
        }
        CheckKind::HpsLinear => out.extend((1..=cfg.pq_max).map(|p| check_hps_linear(data, p))),
        CheckKind::HpsInverseTrace => out.extend((1..=cfg.n_max).map(|n| check_hps_inverse_trace(data, n))),
        CheckKind::Dittmar => out.extend((1..=cfg.n_max).map(|n| check_dittmar(data, n))),
        CheckKind::DittmarTrend => out.push(check_dittmar_trend(data, cfg.trend_terms)),
        CheckKind::Thm11 => {
            for m in 1..=cfg.m_max {
                for n in 1..=cfg.n_max {
                    for f in &cfg.functions {
                        out.push(check_thm11(data, m, n, f));
                    }
                }
            }
        }
        CheckKind::Thm12 => {
            for statement in [1, 2] {
                for r in 1..=cfg.r_max {
                    for s in 1..=cfg.s_max {
                        for m in 1..=cfg.m_max {
                            for f in &cfg.functions {
                                out.push(check_thm12(data, r, s, m, f, statement));
                            }
                        }
                    }
                }
            }
        }
        CheckKind::MatrixAP => {
            for p in 0..=1 {
                match matrix_a_p(data, p) {
                    Ok(rep) => out.extend(rep.bounds),
                    Err(e) => out.push(
                        InequalityReport::new("matrix_a_p", "σ^{(p)}_{b_p+i} ≤ λ_i(A^{(p+1)})", data)
                            .param("p", p)
                            .failed(e),
                    ),
                }
            }
        }
        CheckKind::Thm13Cor52 => out.extend((0..=1).map(|p| check_thm13_cor52(data, p))),
        CheckKind::Cor51 => {
            for p in 0..=1 {
                for i in 1..=binomial(2, p + 1) {
                    out.push(check_cor51(data, p, i));
                }
            }
        }
        CheckKind::BrockRemark => out.extend((0..=1).map(|p| check_brock_remark(data, p))),
    }
    out
}

fn domain_reports(dom: &DomainSpec, cfg: &SuiteConfig) -> Vec<InequalityReport> {
    let data = match dom.data(cfg.counts, cfg.scale) {
        Ok(d) => d.with_policy(cfg.policy),
        Err(e) => {
            let r = InequalityReport::new("spectra", "domain spectra", &SpectralData::placeholder(dom.label()));
            return vec![r.failed(e)];
        }
    };
    let mut out = Vec::new();
    for &kind in &cfg.checks {
        for r in expand_check(kind, &data, cfg) {
            out.push(if cfg.self_test { r.inverted() } else { r });
        }
    }
    out
}

/// Runs every enabled check on every domain, in configuration order. A
/// failing domain or check becomes an error report; the suite never aborts.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteResult> {
    cfg.validate()?;
    let workers = cfg.threads.clamp(1, cfg.domains.len().max(1));
    let mut per_domain: Vec<Vec<InequalityReport>> = vec![Vec::new(); cfg.domains.len()];
    if workers == 1 {
        for (slot, dom) in per_domain.iter_mut().zip(&cfg.domains) {
            *slot = domain_reports(dom, cfg);
        }
    } else {
        let chunk = cfg.domains.len().div_ceil(workers);
        std::thread::scope(|scope| {
            for (slots, doms) in per_domain.chunks_mut(chunk).zip(cfg.domains.chunks(chunk)) {
                scope.spawn(move || {
                    for (slot, dom) in slots.iter_mut().zip(doms) {
                        *slot = domain_reports(dom, cfg);
                    }
                });
            }
        });
    }
    let reports: Vec<InequalityReport> = per_domain.into_iter().flatten().collect();
    let mut convergence = Vec::new();
    let mut convergence_errors = Vec::new();
    for (shape, q) in &cfg.convergence {
        match convergence_study(&shape.scaled(cfg.scale), cfg.convergence_base_h * cfg.scale, cfg.convergence_levels, *q) {
            Ok(t) => convergence.push(t),
            Err(e) => convergence_errors.push(format!("{} {}: {e}", shape.label(), q.label())),
        }
    }
    Ok(SuiteResult {
        summary: Summary::of(&reports),
        reports,
        convergence,
        convergence_errors,
    })
}

impl SpectralData {
    fn placeholder(domain: String) -> Self {
        Self {
            domain,
            h: None,
            b0: 0,
            b1: 0,
            loops: 0,
            planar: false,
            area: f64::NAN,
            length: f64::NAN,
            sigma: Vec::new(),
            lambda: Vec::new(),
            sigma1: None,
            normal_integrals: None,
            policy: TolerancePolicy::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analytic_only() -> SuiteConfig {
        SuiteConfig {
            domains: vec![
                DomainSpec::analytic(Shape::Disk { radius: 1.0 }),
                DomainSpec::analytic(Shape::Annulus { inner: 0.5, outer: 1.0 }),
            ],
            convergence: Vec::new(),
            ..Default::default()
        }
    }

    #[test]
    fn analytic_suite_has_no_violations() {
        let res = run_suite(&analytic_only()).unwrap();
        assert_eq!(res.summary.violated, 0, "{:#?}", res.reports.iter().filter(|r| r.verdict == Verdict::Violated).collect::<Vec<_>>());
        assert_eq!(res.summary.errored, 0);
        assert!(res.summary.verified > 100);
        assert!(res.summary.hypothesis_violation > 0);
    }

    #[test]
    fn negative_control_reports_violations() {
        let cfg = SuiteConfig {
            self_test: true,
            ..analytic_only()
        };
        assert!(run_suite(&cfg).unwrap().has_violations());
    }

    #[test]
    fn threaded_run_keeps_order() {
        let serial = run_suite(&analytic_only()).unwrap();
        let threaded = run_suite(&SuiteConfig {
            threads: 4,
            ..analytic_only()
        })
        .unwrap();
        assert_eq!(serial.reports_json(), threaded.reports_json());
    }

    #[test]
    fn config_caps_are_validated() {
        let mut cfg = analytic_only();
        cfg.n_max = 30;
        assert!(run_suite(&cfg).is_err());
    }

    #[test]
    fn csv_mirrors_json() {
        let cfg = SuiteConfig {
            checks: vec![CheckKind::Weinstock],
            ..analytic_only()
        };
        let res = run_suite(&cfg).unwrap();
        let csv = res.reports_csv();
        assert_eq!(csv.lines().count(), 1 + res.reports.len());
        assert!(csv.starts_with("name,anchor,params,lhs,rhs,slack,tol,verdict,domain,h,note\n"));
        let json: serde_json::Value = serde_json::from_str(&res.reports_json()).unwrap();
        let keys: Vec<&str> = json[0].as_object().unwrap().keys().map(|k| k.as_str()).collect();
        for k in ["name", "anchor", "params", "lhs", "rhs", "slack", "tol", "verdict", "domain", "h"] {
            assert!(keys.contains(&k));
        }
    }

    #[test]
    fn check_names_parse() {
        for c in CheckKind::ALL {
            assert_eq!(CheckKind::parse(c.name()).unwrap(), c);
        }
        assert_eq!(CheckKind::parse("thm13").unwrap(), CheckKind::Thm13Cor52);
    }
}
