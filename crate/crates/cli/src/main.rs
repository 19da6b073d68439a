//! `sqg`: run, sweep, rates and validate.

mod commands;
mod config;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::ErrorInfo;

#[derive(Parser)]
#[command(name = "sqg", version, about = "Pseudo-spectral SQG runs and vanishing-viscosity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "sqg-out")]
    out: PathBuf,
    /// Worker threads for per-viscosity parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for random initial data, replacing the one in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration; writes diagnostics.csv, final.sqgf, manifest.json.
    Run(Common),
    /// Viscosity sweep; writes sweep.json, sweep.csv, smalltime.csv, manifest.json.
    Sweep(Common),
    /// Rate fits for the scaling family; writes rates.csv, rates.json, manifest.json.
    Rates(Common),
    /// Runs the invariant suites and prints a pass/fail matrix.
    Validate {
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Cfl(String),
    BlowUp(String),
    Io(String),
    Validation(String),
}

impl Failure {
    pub fn category(&self) -> &'static str {
        match self {
            Self::Config(_) => "config_error",
            Self::Cfl(_) => "cfl_violation",
            Self::BlowUp(_) => "blow_up",
            Self::Io(_) => "io_error",
            Self::Validation(_) => "validation_failure",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 1,
            Self::Config(_) => 2,
            Self::Cfl(_) => 3,
            Self::BlowUp(_) => 4,
            Self::Io(_) => 5,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Cfl(m) | Self::BlowUp(m) | Self::Io(m) | Self::Validation(m) => m,
        }
    }

    pub fn info(&self) -> ErrorInfo {
        ErrorInfo {
            category: self.category(),
            message: self.message().to_string(),
        }
    }

    /// Classifies a library error raised while running.
    pub fn from_core(e: sqg_core::Error, context: &str) -> Self {
        use sqg_core::Error as E;
        let msg = if context.is_empty() { e.to_string() } else { format!("{context}: {e}") };
        match e {
            E::CflViolation { .. } => Self::Cfl(msg),
            E::BlowUp { .. } | E::NonFinite(_) => Self::BlowUp(msg),
            E::Io(_) | E::Checkpoint(_) => Self::Io(msg),
            _ => Self::Config(msg),
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Self::Config(e.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

fn set_jobs(jobs: Option<usize>) -> Result<(), Failure> {
    match jobs {
        None => Ok(()),
        Some(0) => Err(Failure::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string())),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(c) => {
            set_jobs(c.jobs)?;
            commands::run(&c.config, &c.out, c.seed)
        }
        Command::Sweep(c) => {
            set_jobs(c.jobs)?;
            commands::sweep(&c.config, &c.out, c.seed)
        }
        Command::Rates(c) => {
            set_jobs(c.jobs)?;
            commands::rates(&c.config, &c.out)
        }
        Command::Validate { jobs } => {
            set_jobs(jobs)?;
            validate::validate()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let line = serde_json::json!({ "error": f.info() });
            eprintln!("{line}");
            ExitCode::from(f.exit_code())
        }
    }
}
