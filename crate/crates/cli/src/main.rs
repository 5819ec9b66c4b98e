//! `rtfm`: simulation campaigns, estimation, rank selection, truncation
//! tuning, forecasting and diagnostics for robust tensor factor models.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_kappa, parse_ranks, parse_tau, RunConfig};

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<rtfm_core::Error> for CliError {
    fn from(e: rtfm_core::Error) -> Self {
        use rtfm_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Io(_) | E::Format(_) => CliError::Io(msg),
            E::InvalidArgument(_)
            | E::RankOutOfRange { .. }
            | E::ShapeMismatch(_)
            | E::ModeOutOfRange { .. }
            | E::InsufficientSample(_) => CliError::Config(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "rtfm", version, about = "Robust tensor factor models via element-wise truncation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Key-value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input series: an RTFM1 binary file or, for vector panels, a CSV table.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 or unset uses all cores.
    #[arg(long, global = true, env = "RTFM_THREADS")]
    threads: Option<usize>,
    /// Truncation level: a positive number, `inf` or `cv`.
    #[arg(long, global = true)]
    tau: Option<String>,
    /// Factor truncation level: a positive number, `inf` or `tau`.
    #[arg(long, global = true)]
    kappa: Option<String>,
    /// Comma-separated factor numbers, or `auto`.
    #[arg(long, global = true)]
    ranks: Option<String>,
    /// Number of refinement iterations.
    #[arg(long, global = true)]
    iters: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Monte Carlo campaign over a named scenario.
    Simulate,
    /// Fit loadings, factors and common component to a data file.
    Estimate,
    /// Select factor numbers.
    Rank,
    /// Cross-validation curve of the truncation level.
    Cv,
    /// Rolling-window forecasts of a vector panel against the untruncated forecaster.
    Forecast,
    /// Standardized loading deviations for the normality check.
    Diagnose,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Estimate => "estimate",
            Command::Rank => "rank",
            Command::Cv => "cv",
            Command::Forecast => "forecast",
            Command::Diagnose => "diagnose",
        }
    }
}

/// A configuration file, or any CSV this tool wrote: its audit line then
/// supplies the settings, which must belong to the same command.
fn read_config(text: &str, command: &str) -> CliResult<RunConfig> {
    let prefix = format!("# rtfm schema={} ", rtfm_core::io::CSV_SCHEMA);
    match text.lines().next() {
        Some(first) if first.starts_with("# rtfm ") => {
            let body = first
                .strip_prefix(&prefix)
                .ok_or_else(|| CliError::Config(format!("unsupported audit line '{first}'")))?;
            let (cmd, cfg) = RunConfig::from_audit(body)?;
            if cmd != command {
                return Err(CliError::Config(format!("audit line records a '{cmd}' run, not '{command}'")));
            }
            Ok(cfg)
        }
        _ => RunConfig::parse(text),
    }
}

fn resolve(common: &Common, command: &str) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            read_config(&text, command)?
        }
        None => RunConfig::default(),
    };
    if let Some(d) = &common.data {
        cfg.data = Some(d.clone());
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = &common.tau {
        cfg.tau = parse_tau(t)?;
    }
    if let Some(k) = &common.kappa {
        cfg.kappa = parse_kappa(k)?;
    }
    if let Some(r) = &common.ranks {
        cfg.ranks = Some(parse_ranks(r)?);
    }
    if let Some(i) = common.iters {
        cfg.iterations = i;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let name = cli.command.name();
    let cfg = resolve(&cli.common, name)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(format!("creating {}: {e}", cfg.out.display())))?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, name),
        Command::Estimate => commands::estimate(&cfg, name),
        Command::Rank => commands::rank(&cfg, name),
        Command::Cv => commands::cv(&cfg, name),
        Command::Forecast => commands::forecast(&cfg, name),
        Command::Diagnose => commands::diagnose(&cfg, name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rtfm: {e}");
            ExitCode::from(e.code())
        }
    }
}
