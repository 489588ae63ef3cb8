use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "steklov", version, about = "Steklov and boundary Laplace spectra with trace inequality checks")]
pub struct Cli {
    /// Flat `key = value` file mirroring long flags; flags on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or load a mesh and report its topology.
    Mesh(MeshArgs),
    /// Compute a spectrum, with an analytic comparison where one exists.
    Spectrum(SpectrumArgs),
    /// Run the inequality suite or a single check.
    Verify(VerifyArgs),
    /// Convergence study of one quantity under uniform refinement.
    Converge(ConvergeArgs),
    /// Randomized Hadamard-product majorization checks.
    Majorize(MajorizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeKind {
    Disk,
    Annulus,
    Ellipse,
    Rectangle,
}

#[derive(Debug, Clone, Args)]
pub struct DomainArgs {
    #[arg(long, value_enum, conflicts_with = "load")]
    pub shape: Option<ShapeKind>,
    /// OFF mesh to load instead of generating one.
    #[arg(long, value_name = "PATH")]
    pub load: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.5, value_parser = positive)]
    pub inner: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub outer: f64,
    /// Ellipse semi-axis along x.
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    pub a: f64,
    /// Ellipse semi-axis along y.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub width: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub height: f64,
    /// Target mesh size.
    #[arg(long, value_parser = positive)]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(short = 'o', long = "out", value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Json, Format::Csv, Format::Svg])]
    pub format: Vec<Format>,
}

impl OutputArgs {
    pub fn wants(&self, f: Format) -> bool {
        self.format.contains(&f)
    }
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumKindArg {
    Steklov0,
    Steklov1,
    Blap,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, value_enum, default_value = "steklov0")]
    pub kind: SpectrumKindArg,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Named suite; only `default` exists.
    #[arg(long, conflicts_with = "check")]
    pub suite: Option<String>,
    /// Single check: weinstock, hps_product, hps_linear, hps_inverse_trace,
    /// dittmar, dittmar_trend, thm11, thm12, matrix_a_p, thm13_cor52, cor51,
    /// brock_remark.
    #[arg(long)]
    pub check: Option<String>,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub r: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub s: Option<u64>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub q: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub i: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub statement: Option<u8>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub terms: Option<u64>,
    /// Convex functions: t, t2, t3, exp, hinge:c, affine:a:b.
    #[arg(long, value_delimiter = ',')]
    pub f: Vec<String>,
    /// Scale every domain by this factor.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub scale: f64,
    /// Invert every claim; the run must then report violations.
    #[arg(long)]
    pub self_test: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// sigma<k>, lambda<k>, sigma1_<k>, area or length.
    #[arg(long, default_value = "sigma2")]
    pub quantity: String,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(3..))]
    pub levels: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MajorizeArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub min_size: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub max_size: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

/// Reads a flat `key = value` file. Blank lines and `#` comments are ignored.
pub fn read_config(path: &std::path::Path) -> Result<BTreeMap<String, String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key = value", path.display(), k + 1))?;
        out.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(out)
}

/// Inserts config entries as flags after the subcommand name, skipping keys
/// already given on the command line. Keys that no subcommand knows are
/// rejected; keys belonging to other subcommands are ignored.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv.get(pos + 1).cloned().ok_or("--config needs a path")?,
    };
    let entries = read_config(path.as_ref())?;

    let cmd = Cli::command();
    let sub_names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let Some(sub_pos) = argv.iter().skip(1).position(|a| sub_names.contains(a)).map(|p| p + 1) else {
        return Ok(argv);
    };
    let sub = cmd.find_subcommand(&argv[sub_pos]).expect("listed subcommand");
    let known_anywhere = |key: &str| {
        cmd.get_subcommands()
            .any(|s| s.get_arguments().any(|a| a.get_long() == Some(key)))
    };

    let mut injected = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            if known_anywhere(&key) {
                continue;
            }
            return Err(format!("unknown config key '{key}'"));
        };
        let flag = format!("--{key}");
        let given = argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
            || arg
                .get_short()
                .is_some_and(|c| argv.iter().any(|a| *a == format!("-{c}")));
        if given {
            continue;
        }
        if matches!(arg.get_action(), clap::ArgAction::SetTrue) {
            match value.as_str() {
                "true" | "1" | "yes" => injected.push(flag),
                "false" | "0" | "no" => {}
                other => return Err(format!("config key '{key}': expected a boolean, got '{other}'")),
            }
        } else {
            injected.push(flag);
            injected.push(value);
        }
    }
    let mut out = argv;
    out.splice(sub_pos + 1..sub_pos + 1, injected);
    Ok(out)
}
