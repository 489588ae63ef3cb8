use std::fs;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use steklov_core::majorize::{lemma22_check, schur_diag_majorization, IncreasingConvexFn, SymMatrix};
use steklov_core::mesh::{generate_shape, load_mesh, to_off_string, Mesh, Shape};
use steklov_core::spectra::{
    annulus_steklov_analytic, boundary_laplace, circles_laplace_analytic, disk_steklov_1form_analytic,
    disk_steklov_analytic, steklov_1forms_planar, steklov_functions, Spectrum,
};
use steklov_core::verify::{
    binomial, check_brock_remark, check_cor51, check_dittmar, check_dittmar_trend, check_hps_inverse_trace,
    check_hps_linear, check_hps_product, check_thm11, check_thm12, check_thm13_cor52, check_weinstock,
    convergence_study, matrix_a_p, run_suite, CheckKind, ConvergenceTable, DomainSpec, InequalityReport, Quantity,
    Source, SpectrumCounts, SuiteConfig, SuiteResult, Verdict,
};

use crate::args::*;

pub const DEFAULT_H: f64 = 0.05;
pub const DEFAULT_CONVERGENCE_H: f64 = 0.1;
pub const DEFAULT_OUT: &str = "steklov-out";
pub const THREADS_ENV: &str = "STEKLOV_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<steklov_core::Error> for CliError {
    fn from(e: steklov_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Successful runs either verified everything or found a violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Violation,
}

pub type CmdResult = Result<Outcome, CliError>;

fn shape_of(d: &DomainArgs) -> Shape {
    match d.shape.unwrap_or(ShapeKind::Disk) {
        ShapeKind::Disk => Shape::Disk { radius: d.radius },
        ShapeKind::Annulus => Shape::Annulus {
            inner: d.inner,
            outer: d.outer,
        },
        ShapeKind::Ellipse => Shape::Ellipse { a: d.a, b: d.b },
        ShapeKind::Rectangle => Shape::Rectangle {
            width: d.width,
            height: d.height,
        },
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mesh".into())
}

fn shape_name(d: &DomainArgs) -> String {
    match (&d.load, d.shape.unwrap_or(ShapeKind::Disk)) {
        (Some(p), _) => file_stem(p),
        (None, ShapeKind::Disk) => "disk".into(),
        (None, ShapeKind::Annulus) => "annulus".into(),
        (None, ShapeKind::Ellipse) => "ellipse".into(),
        (None, ShapeKind::Rectangle) => "rectangle".into(),
    }
}

fn check_shape(d: &DomainArgs) -> Result<(), CliError> {
    if d.shape == Some(ShapeKind::Annulus) && d.inner >= d.outer {
        return Err(CliError::Usage(format!(
            "annulus needs inner < outer, got {} and {}",
            d.inner, d.outer
        )));
    }
    Ok(())
}

fn build_mesh(d: &DomainArgs) -> Result<Mesh, CliError> {
    check_shape(d)?;
    match &d.load {
        Some(path) => Ok(load_mesh(path)?),
        None => Ok(generate_shape(&shape_of(d), d.h.unwrap_or(DEFAULT_H))?),
    }
}

/// Analytic spectra for disk and annulus unless a mesh size is given.
fn domain_spec(d: &DomainArgs) -> Result<DomainSpec, CliError> {
    check_shape(d)?;
    if let Some(path) = &d.load {
        return Ok(DomainSpec {
            shape: Shape::Loaded { name: file_stem(path) },
            source: Source::File { path: path.clone() },
        });
    }
    let shape = shape_of(d);
    Ok(match (d.h, &shape) {
        (Some(h), _) => DomainSpec::fem(shape, h),
        (None, Shape::Disk { .. } | Shape::Annulus { .. }) => DomainSpec::analytic(shape),
        (None, _) => DomainSpec::fem(shape, DEFAULT_H),
    })
}

fn out_dir(o: &OutputArgs) -> Result<PathBuf, CliError> {
    let dir = o.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write(path: PathBuf, contents: &str) -> Result<(), CliError> {
    fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn file_label(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect();
    while out.contains("__") {
        out = out.replace("__", "_");
    }
    out.trim_matches('_').to_string()
}

#[derive(Serialize)]
struct TopologySummary {
    shape: String,
    vertices: usize,
    triangles: usize,
    b0: usize,
    b1: usize,
    boundary_loops: usize,
    euler_characteristic: i64,
    area: f64,
    boundary_length: f64,
    loop_lengths: Vec<f64>,
    max_edge_length: f64,
    planar: bool,
}

pub fn cmd_mesh(a: &MeshArgs) -> CmdResult {
    let mesh = build_mesh(&a.domain)?;
    let topo = mesh.topology();
    let meas = mesh.measures();
    let summary = TopologySummary {
        shape: mesh.shape().label(),
        vertices: mesh.num_vertices(),
        triangles: mesh.num_triangles(),
        b0: topo.b0,
        b1: topo.b1,
        boundary_loops: topo.boundary_component_count,
        euler_characteristic: topo.euler_characteristic as i64,
        area: meas.area,
        boundary_length: meas.boundary_length,
        loop_lengths: meas.loop_lengths.clone(),
        max_edge_length: mesh.max_edge_length(),
        planar: mesh.is_planar(),
    };
    let json = to_json(&summary);
    if a.output.out.is_some() {
        let dir = out_dir(&a.output)?;
        write(dir.join(format!("{}.off", shape_name(&a.domain))), &to_off_string(&mesh))?;
        write(dir.join("topology.json"), &json)?;
    }
    print!("{json}");
    Ok(Outcome::Clean)
}

fn spectrum_of(mesh: &Mesh, kind: SpectrumKindArg, count: usize) -> Result<Spectrum, CliError> {
    Ok(match kind {
        SpectrumKindArg::Steklov0 => steklov_functions(mesh, count)?,
        SpectrumKindArg::Steklov1 => steklov_1forms_planar(mesh, count)?,
        SpectrumKindArg::Blap => boundary_laplace(mesh, count)?,
    })
}

/// Closed-form values for the generated disk and annulus.
fn oracle(d: &DomainArgs, kind: SpectrumKindArg, count: usize) -> Option<Vec<f64>> {
    if d.load.is_some() {
        return None;
    }
    let tau = 2.0 * std::f64::consts::PI;
    let s = match (shape_of(d), kind) {
        (Shape::Disk { radius }, SpectrumKindArg::Steklov0) => disk_steklov_analytic(radius, count),
        (Shape::Disk { radius }, SpectrumKindArg::Steklov1) => disk_steklov_1form_analytic(radius, count),
        (Shape::Disk { radius }, SpectrumKindArg::Blap) => circles_laplace_analytic(&[tau * radius], count),
        (Shape::Annulus { inner, outer }, SpectrumKindArg::Steklov0) => annulus_steklov_analytic(inner, outer, count),
        (Shape::Annulus { inner, outer }, SpectrumKindArg::Blap) => {
            circles_laplace_analytic(&[tau * inner, tau * outer], count)
        }
        _ => return None,
    };
    Some(s.values)
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<f64>,
}

fn spectrum_csv(rows: &[SpectrumRow], with_oracle: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index", "value"];
    if with_oracle {
        header.extend(["analytic", "error"]);
    }
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![r.index.to_string(), r.value.to_string()];
        if with_oracle {
            rec.push(r.analytic.map(|v| v.to_string()).unwrap_or_default());
            rec.push(r.error.map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> CmdResult {
    let count = a.count as usize;
    let mesh = build_mesh(&a.domain)?;
    let spec = spectrum_of(&mesh, a.kind, count)?;
    let exact = oracle(&a.domain, a.kind, count);
    let rows: Vec<SpectrumRow> = spec
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let e = exact.as_ref().and_then(|x| x.get(k).copied());
            SpectrumRow {
                index: k + 1,
                value: v,
                analytic: e,
                error: e.map(|e| if e == 0.0 { (v - e).abs() } else { (v - e).abs() / e.abs() }),
            }
        })
        .collect();
    let csv = spectrum_csv(&rows, exact.is_some());
    if a.output.out.is_some() {
        let dir = out_dir(&a.output)?;
        let stem = format!("spectrum_{}", spec.kind.label());
        if a.output.wants(Format::Csv) {
            write(dir.join(format!("{stem}.csv")), &csv)?;
        }
        if a.output.wants(Format::Json) {
            write(dir.join(format!("{stem}.json")), &to_json(&rows))?;
        }
    }
    print!("{csv}");
    Ok(Outcome::Clean)
}

fn functions(names: &[String]) -> Result<Vec<IncreasingConvexFn>, CliError> {
    names
        .iter()
        .map(|n| IncreasingConvexFn::parse(n).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(1)
}

fn verdict_text(v: Verdict) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|x| x.as_str().map(|s| s.replace('-', " ")))
        .unwrap_or_default()
}

fn report_line(r: &InequalityReport) -> String {
    let params = serde_json::to_string(&r.params).expect("serializable");
    let mut line = format!(
        "{:<20} {} {} {} lhs={:.9} rhs={:.9} slack={:.3e}",
        verdict_text(r.verdict),
        r.name,
        r.domain,
        params,
        r.lhs,
        r.rhs,
        r.slack
    );
    if !r.note.is_empty() {
        line.push_str(&format!(" ({})", r.note));
    }
    line
}

fn single_check(a: &VerifyArgs, name: &str) -> Result<Vec<InequalityReport>, CliError> {
    let kind = CheckKind::parse(name).map_err(|e| CliError::Usage(e.to_string()))?;
    let spec = domain_spec(&a.domain)?;
    let data = spec.data(SpectrumCounts::default(), a.scale)?;
    let f = functions(&a.f)?.into_iter().next().unwrap_or_else(IncreasingConvexFn::identity);
    let get = |v: Option<u64>, default: usize| v.map(|x| x as usize).unwrap_or(default);
    let (m, n, r, s, q, i) = (get(a.m, 1), get(a.n, 1), get(a.r, 1), get(a.s, 1), get(a.q, 1), get(a.i, 1));
    let statement = a.statement.unwrap_or(1);
    let reports = match kind {
        CheckKind::Weinstock => vec![check_weinstock(&data)],
        CheckKind::HpsProduct => vec![check_hps_product(&data, get(a.p, 1), q)],
        CheckKind::HpsLinear => vec![check_hps_linear(&data, get(a.p, 1))],
        CheckKind::HpsInverseTrace => vec![check_hps_inverse_trace(&data, n)],
        CheckKind::Dittmar => vec![check_dittmar(&data, n)],
        CheckKind::DittmarTrend => vec![check_dittmar_trend(&data, get(a.terms, 30))],
        CheckKind::Thm11 => vec![check_thm11(&data, m, n, &f)],
        CheckKind::Thm12 => vec![check_thm12(&data, r, s, m, &f, statement)],
        CheckKind::MatrixAP => matrix_a_p(&data, get(a.p, 0))?.bounds,
        CheckKind::Thm13Cor52 => vec![check_thm13_cor52(&data, get(a.p, 0))],
        CheckKind::Cor51 => {
            let p = get(a.p, 0);
            if p <= 1 && i > binomial(2, p + 1) {
                return Err(CliError::Usage(format!("i must be at most {}", binomial(2, p + 1))));
            }
            vec![check_cor51(&data, p, i)]
        }
        CheckKind::BrockRemark => vec![check_brock_remark(&data, get(a.p, 0))],
    };
    Ok(if a.self_test {
        reports.into_iter().map(InequalityReport::inverted).collect()
    } else {
        reports
    })
}

fn suite_config(a: &VerifyArgs) -> Result<SuiteConfig, CliError> {
    if let Some(name) = &a.suite {
        if name != "default" {
            return Err(CliError::Usage(format!("unknown suite '{name}'")));
        }
    }
    let mut cfg = SuiteConfig {
        scale: a.scale,
        self_test: a.self_test,
        threads: threads(),
        ..SuiteConfig::default()
    };
    if a.domain.shape.is_some() || a.domain.load.is_some() {
        cfg.domains = vec![domain_spec(&a.domain)?];
    }
    if !a.f.is_empty() {
        cfg.functions = functions(&a.f)?;
    }
    let set = |slot: &mut usize, v: Option<u64>| {
        if let Some(v) = v {
            *slot = v as usize;
        }
    };
    set(&mut cfg.m_max, a.m);
    set(&mut cfg.n_max, a.n);
    set(&mut cfg.r_max, a.r);
    set(&mut cfg.s_max, a.s);
    set(&mut cfg.pq_max, a.p.or(a.q));
    set(&mut cfg.trend_terms, a.terms);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn write_tables(dir: &Path, tables: &[ConvergenceTable], o: &OutputArgs) -> Result<(), CliError> {
    for t in tables {
        let stem = file_label(&format!("convergence_{}_{}", t.domain, t.quantity.label()));
        if o.wants(Format::Csv) {
            write(dir.join(format!("{stem}.csv")), &t.to_csv())?;
        }
        if o.wants(Format::Svg) {
            write(dir.join(format!("{stem}.svg")), &t.to_svg())?;
        }
        if o.wants(Format::Json) {
            write(dir.join(format!("{stem}.json")), &to_json(t))?;
        }
    }
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let result = match &a.check {
        Some(name) => {
            let reports = single_check(a, name)?;
            SuiteResult::from_reports(reports)
        }
        None => run_suite(&suite_config(a)?)?,
    };
    let dir = out_dir(&a.output)?;
    if a.output.wants(Format::Json) {
        write(dir.join("reports.json"), &(result.reports_json() + "\n"))?;
        write(dir.join("summary.json"), &to_json(&result.summary))?;
    }
    if a.output.wants(Format::Csv) {
        write(dir.join("reports.csv"), &result.reports_csv())?;
    }
    write_tables(&dir, &result.convergence, &a.output)?;

    if a.check.is_some() {
        for r in &result.reports {
            println!("{}", report_line(r));
        }
    } else {
        for r in result.reports.iter().filter(|r| r.verdict == Verdict::Violated || r.verdict == Verdict::Error) {
            println!("{}", report_line(r));
        }
        for e in &result.convergence_errors {
            println!("convergence error: {e}");
        }
    }
    let s = &result.summary;
    println!(
        "{} reports: {} verified, {} violated, {} hypothesis violation, {} out of scope, {} skipped, {} trend, {} error; written to {}",
        s.total,
        s.verified,
        s.violated,
        s.hypothesis_violation,
        s.out_of_scope,
        s.skipped,
        s.trend,
        s.errored,
        dir.display()
    );
    Ok(if result.has_violations() {
        Outcome::Violation
    } else {
        Outcome::Clean
    })
}

pub fn cmd_converge(a: &ConvergeArgs) -> CmdResult {
    if a.domain.load.is_some() {
        return Err(CliError::Usage("convergence studies need a generated shape".into()));
    }
    check_shape(&a.domain)?;
    let quantity = Quantity::parse(&a.quantity).map_err(|e| CliError::Usage(e.to_string()))?;
    let table = convergence_study(
        &shape_of(&a.domain),
        a.domain.h.unwrap_or(DEFAULT_CONVERGENCE_H),
        a.levels as usize,
        quantity,
    )?;
    if a.output.out.is_some() {
        let dir = out_dir(&a.output)?;
        write_tables(&dir, std::slice::from_ref(&table), &a.output)?;
    }
    print!("{}", table.to_csv());
    println!(
        "# observed order {:.4}, richardson order {:.4}, monotone {}",
        table.observed_order, table.richardson_order, table.monotone
    );
    Ok(Outcome::Clean)
}

#[derive(Serialize)]
struct MajorizeSummary {
    samples: u64,
    seed: u64,
    functions: Vec<String>,
    lemma_checks: usize,
    lemma_violations: usize,
    schur_checks: usize,
    schur_violations: usize,
    worst_margin: f64,
}

/// `G Gᵀ / n + δ I` with uniform entries in `[-1, 1]`.
pub fn random_spd(rng: &mut StdRng, n: usize) -> Result<SymMatrix, steklov_core::Error> {
    let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let delta = rng.gen_range(0.05..1.0);
    SymMatrix::from_fn(n, |i, j| {
        let dot: f64 = (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum();
        dot / n as f64 + if i == j { delta } else { 0.0 }
    })
}

pub fn cmd_majorize(a: &MajorizeArgs) -> CmdResult {
    if a.min_size > a.max_size {
        return Err(CliError::Usage("min-size exceeds max-size".into()));
    }
    let catalog = IncreasingConvexFn::catalog();
    let mut rng = StdRng::seed_from_u64(a.seed);
    let mut summary = MajorizeSummary {
        samples: a.samples,
        seed: a.seed,
        functions: catalog.iter().map(|f| f.name()).collect(),
        lemma_checks: 0,
        lemma_violations: 0,
        schur_checks: 0,
        schur_violations: 0,
        worst_margin: f64::INFINITY,
    };
    for _ in 0..a.samples {
        let n = rng.gen_range(a.min_size..=a.max_size) as usize;
        let x = random_spd(&mut rng, n)?;
        let y = random_spd(&mut rng, n)?;
        for f in &catalog {
            let rep = lemma22_check(&x, &y, f)?;
            summary.lemma_checks += 1;
            summary.worst_margin = summary.worst_margin.min((rep.lhs - rep.rhs) / rep.rhs.abs().max(1e-300));
            if !rep.holds {
                summary.lemma_violations += 1;
            }
        }
        let sym = SymMatrix::from_fn(n, |i, j| x.get(i, j) - y.get(i, j))?;
        summary.schur_checks += 1;
        if !schur_diag_majorization(&sym)?.holds {
            summary.schur_violations += 1;
        }
    }
    let json = to_json(&summary);
    if a.output.out.is_some() {
        let dir = out_dir(&a.output)?;
        write(dir.join("majorize.json"), &json)?;
    }
    print!("{json}");
    Ok(if summary.lemma_violations + summary.schur_violations > 0 {
        Outcome::Violation
    } else {
        Outcome::Clean
    })
}
