//! Command-line front end for the `holevo` library.
//!
//! Every command returns an [`Outcome`] holding the exit code and the text for
//! standard output, so the binary is a thin wrapper and tests can drive the
//! commands in-process.

pub mod report;
pub mod scan;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use holevo::channels::{amplitude_damping, depolarizing, identity_channel};
use holevo::ensembles::{delta_chi_actual, delta_chi_bounds, holevo_chi, modify_ensemble};
use holevo::io::{channel_digest, parse_channel, parse_ensemble, parse_members};
use holevo::optimizer::{certify, optimize_capacity};
use holevo::{KrausChannel, OptimizerConfig};
use thiserror::Error;

use report::{BoundsRecord, ReportDocument, Results};

/// Environment variable capping restart parallelism (0 = automatic).
pub const THREADS_ENV: &str = "HOLEVO_OPT_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CERTIFIED: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Holevo {
        context: String,
        source: holevo::Error,
    },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn holevo(context: impl Into<String>) -> impl FnOnce(holevo::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Holevo { context, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "holevo", version, about = "Holevo capacity of quantum channels with optimality certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximize χ over input ensembles and certify the optimum.
    Capacity(CapacityArgs),
    /// Certify a given output ensemble against a channel.
    Certify(CertifyArgs),
    /// Bounds on the change of χ when states are mixed into an ensemble.
    Bounds(BoundsArgs),
    /// CSV data over the Bloch sphere for a qubit channel.
    BlochScan(ScanArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Channel JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub channel: Option<PathBuf>,
    /// Built-in channel: identity, amplitude_damping, depolarizing.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Built-in parameters as key=value (lambda, p, dim).
    #[arg(long = "param", num_args = 1.., value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "tol-chi")]
    pub tol_chi: Option<f64>,
    #[arg(long = "tol-cert")]
    pub tol_cert: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub probes: Option<usize>,
    #[arg(long = "max-members")]
    pub max_members: Option<usize>,
    #[arg(long = "refine-iters")]
    pub refine_iters: Option<usize>,
}

impl OptimizerArgs {
    pub fn config(&self) -> CliResult<OptimizerConfig> {
        let d = OptimizerConfig::default();
        let cfg = OptimizerConfig {
            max_members: self.max_members.or(d.max_members),
            restarts: self.restarts.unwrap_or(d.restarts),
            seed: self.seed.unwrap_or(d.seed),
            tol_chi: self.tol_chi.unwrap_or(d.tol_chi),
            tol_cert: self.tol_cert.unwrap_or(d.tol_cert),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            probe_count: self.probes.unwrap_or(d.probe_count),
            local_refine_iters: self.refine_iters.unwrap_or(d.local_refine_iters),
        };
        cfg.validate().map_err(CliError::holevo("invalid optimizer configuration"))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Ensemble JSON file.
    #[arg(long)]
    pub ensemble: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Original ensemble JSON file.
    #[arg(long)]
    pub ensemble: PathBuf,
    /// Added states with weights q_a, in ensemble JSON format.
    #[arg(long)]
    pub add: PathBuf,
    /// Total weight of the added states, in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub eta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Grid spacing in degrees.
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
}

/// Exit code and standard-output text of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_params(raw: &[String]) -> CliResult<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("parameter '{item}' is not key=value")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("parameter '{k}' has non-numeric value '{v}'")))?;
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

fn dim_param(params: &BTreeMap<String, f64>) -> CliResult<usize> {
    match params.get("dim") {
        None => Ok(2),
        Some(&d) if d >= 1.0 && d.fract() == 0.0 && d <= 64.0 => Ok(d as usize),
        Some(&d) => Err(CliError::Usage(format!("dim must be an integer in 1..=64, got {d}"))),
    }
}

/// Builds a built-in channel from its name and `key=value` parameters.
pub fn builtin_channel(name: &str, raw_params: &[String]) -> CliResult<KrausChannel> {
    let params = parse_params(raw_params)?;
    let allowed: &[&str] = match name {
        "identity" => &["dim"],
        "amplitude_damping" => &["lambda"],
        "depolarizing" => &["p", "dim"],
        other => return Err(CliError::Usage(format!("unknown builtin channel '{other}'"))),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("builtin '{name}' has no parameter '{k}'")));
    }
    let required = |key: &str| {
        params
            .get(key)
            .copied()
            .ok_or_else(|| CliError::Usage(format!("builtin '{name}' requires --param {key}=<value>")))
    };
    let ctx = format!("builtin '{name}'");
    match name {
        "identity" => identity_channel(dim_param(&params)?).map_err(CliError::holevo(ctx)),
        "amplitude_damping" => amplitude_damping(required("lambda")?).map_err(CliError::holevo(ctx)),
        _ => depolarizing(required("p")?, dim_param(&params)?).map_err(CliError::holevo(ctx)),
    }
}

pub fn load_channel(args: &ChannelArgs) -> CliResult<KrausChannel> {
    match (&args.channel, &args.builtin) {
        (Some(path), None) => {
            if !args.params.is_empty() {
                return Err(CliError::Usage("--param applies only to --builtin".into()));
            }
            parse_channel(&read_file(path)?).map_err(CliError::holevo(path.display().to_string()))
        }
        (None, Some(name)) => builtin_channel(name, &args.params),
        _ => Err(CliError::Usage("exactly one of --channel or --builtin is required".into())),
    }
}

fn emit(doc: &ReportDocument, out: Option<&Path>) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    Ok(text)
}

pub fn cmd_capacity(args: &CapacityArgs) -> CliResult<Outcome> {
    let ch = load_channel(&args.channel)?;
    let cfg = args.optimizer.config()?;
    let report = optimize_capacity(&ch, &cfg).map_err(CliError::holevo("capacity optimization"))?;
    let code = if report.converged { EXIT_OK } else { EXIT_NOT_CERTIFIED };
    let doc = ReportDocument::new("capacity", Some(channel_digest(&ch)), Some(cfg), Results::Capacity(report));
    Ok(Outcome {
        code,
        stdout: emit(&doc, args.out.as_deref())?,
    })
}

pub fn cmd_certify(args: &CertifyArgs) -> CliResult<Outcome> {
    let ch = load_channel(&args.channel)?;
    let cfg = args.optimizer.config()?;
    let ensemble = parse_ensemble(&read_file(&args.ensemble)?)
        .map_err(CliError::holevo(args.ensemble.display().to_string()))?;
    let cert = certify(&ch, &ensemble, &cfg).map_err(CliError::holevo("certification"))?;
    let code = if cert.valid { EXIT_OK } else { EXIT_NOT_CERTIFIED };
    let doc = ReportDocument::new("certify", Some(channel_digest(&ch)), Some(cfg), Results::Certificate(cert));
    Ok(Outcome {
        code,
        stdout: emit(&doc, args.out.as_deref())?,
    })
}

pub fn cmd_bounds(args: &BoundsArgs) -> CliResult<Outcome> {
    if !(args.eta > 0.0 && args.eta <= 1.0) {
        return Err(CliError::Usage(format!("--eta must lie in (0, 1], got {}", args.eta)));
    }
    let ensemble = parse_ensemble(&read_file(&args.ensemble)?)
        .map_err(CliError::holevo(args.ensemble.display().to_string()))?;
    let additions =
        parse_members(&read_file(&args.add)?).map_err(CliError::holevo(args.add.display().to_string()))?;
    let bounds = delta_chi_bounds(&ensemble, &additions, args.eta).map_err(CliError::holevo("bounds"))?;
    let actual = delta_chi_actual(&ensemble, &additions, args.eta).map_err(CliError::holevo("bounds"))?;
    let chi_original = holevo_chi(&ensemble).map_err(CliError::holevo("bounds"))?;
    let modified = modify_ensemble(&ensemble, &additions, args.eta).map_err(CliError::holevo("bounds"))?;
    let record = BoundsRecord {
        eta: args.eta,
        chi_original,
        chi_modified: holevo_chi(&modified).map_err(CliError::holevo("bounds"))?,
        lower: bounds.lower,
        upper: bounds.upper,
        delta_chi_actual: actual,
        sandwich_holds: bounds.contains(actual, report::SANDWICH_SLACK),
    };
    let doc = ReportDocument::new("bounds", None, None, Results::Bounds(record));
    Ok(Outcome {
        code: EXIT_OK,
        stdout: emit(&doc, args.out.as_deref())?,
    })
}

pub fn cmd_bloch_scan(args: &ScanArgs) -> CliResult<Outcome> {
    let ch = load_channel(&args.channel)?;
    if ch.dim() != 2 {
        return Err(CliError::Usage(format!("bloch-scan needs a qubit channel, got dimension {}", ch.dim())));
    }
    let cfg = args.optimizer.config()?;
    let report = optimize_capacity(&ch, &cfg).map_err(CliError::holevo("capacity optimization"))?;
    let text = scan::bloch_scan_csv(&ch, &report, args.resolution)?;
    Ok(Outcome {
        code: EXIT_OK,
        stdout: text,
    })
}

/// Thread count from [`THREADS_ENV`]; `None` means automatic.
pub fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Usage(format!("{THREADS_ENV} must be a nonnegative integer, got '{v}'"))),
        },
    }
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let dispatch = || match &cli.command {
        Command::Capacity(a) => cmd_capacity(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::BlochScan(a) => cmd_bloch_scan(a),
    };
    match thread_cap()? {
        None => dispatch(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?
            .install(dispatch),
    }
}
