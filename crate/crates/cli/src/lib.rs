//! Experiment runner behind the `rrecon` binary.
//!
//! Every subcommand reads a [`config::Config`], produces CSV rows ordered by
//! row key and prepends a header that echoes the fully resolved
//! configuration. Rows that could not be produced are reported separately.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::Report;
pub use config::Config;

/// Environment variable overriding the worker count of the config file.
pub const WORKERS_ENV: &str = "RRECON_WORKERS";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] rateless_recon::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    /// 20 blocks per point, SNR grid -12..0 dB in 2 dB steps.
    Desk,
    /// 40 blocks per point, SNR grid down to -20 dB; runs for hours.
    Paper,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(format!("unknown profile `{s}` (desk or paper)")),
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Monte Carlo reconciliation efficiency per SNR and degree distribution.
    Efficiency,
    /// Modulation variance maximizing the asymptotic key rate per distance.
    OptimalVa,
    /// Finite-size secret key rate versus distance.
    Skr,
    /// Decoder timing on single-shot blocks.
    DecodeBench,
    /// Re-runs an archived session transcript and checks it bit for bit.
    Replay,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Efficiency => "efficiency",
            Command::OptimalVa => "optimal-va",
            Command::Skr => "skr",
            Command::DecodeBench => "decode-bench",
            Command::Replay => "replay",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rrecon", version, about = "Rateless CV-QKD reconciliation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key = value configuration file; a CSV written by this tool also works.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. `--set blocks=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Master seed; required here or in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, global = true)]
    pub profile: Option<Profile>,
    /// Output CSV path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; beats the environment and the config file.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

/// Assembles the configuration: file, then `--set`, then dedicated flags.
pub fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    for o in &cli.overrides {
        cfg.set(o)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set_value("seed", seed);
    }
    if let Some(p) = cli.profile {
        cfg.set_value("profile", p);
    }
    Ok(cfg)
}

fn workers(cli: &Cli, cfg: &mut Config) -> Result<Option<usize>, CliError> {
    let parse = |src: &str, s: &str| {
        s.trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{src}: worker count must be a positive integer, got `{s}`")))
    };
    let from_file = cfg.raw("workers").map(|s| parse("workers", &s)).transpose()?;
    if let Some(n) = cli.workers {
        return Ok(Some(n.max(1)));
    }
    if let Ok(s) = std::env::var(WORKERS_ENV) {
        return parse(WORKERS_ENV, &s).map(Some);
    }
    Ok(from_file)
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match try_run(cli) {
        Ok(report) => {
            for f in &report.failures {
                eprintln!("row failed: {f}");
            }
            if report.failures.is_empty() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("rrecon: {e}");
            e.exit_code()
        }
    }
}

fn try_run(cli: &Cli) -> Result<Report, CliError> {
    let mut cfg = load_config(cli)?;
    let threads = workers(cli, &mut cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let report = pool.install(|| commands::execute(cli.command, &mut cfg))?;
    match &cli.out {
        Some(p) => std::fs::write(p, &report.csv).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => print!("{}", report.csv),
    }
    Ok(report)
}
