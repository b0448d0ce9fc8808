//! `sxt <command> --config path.json --out report.json [--trace]`

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;
use sxt_core::Error;

#[derive(Parser)]
#[command(
    name = "sxt",
    version,
    about = "Desk-scale randomness extraction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Include per-step detail in the report.
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact error of a seeded extractor on a family of sources.
    VerifyExtractor(Io),
    /// Stopping-vertex decomposition of a branching-program source.
    ReduceSmallspace(Io),
    /// Reduce and Majority on sumset sources.
    SumsetPipeline(Io),
    /// Fourier, energy, spectrum, LP and Monte Carlo analyses.
    Analyze(Io),
}

pub enum Failure {
    Config(String),
    Cap(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            e if e.is_size_cap() => Failure::Cap(e.to_string()),
            Error::RetryBudgetExhausted { .. } => Failure::Cap(e.to_string()),
            Error::Lp(_) => Failure::Internal(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(format!("schema: {e}"))
    }
}

pub type CmdResult<T> = std::result::Result<T, Failure>;

fn set_threads() -> CmdResult<()> {
    let Ok(v) = std::env::var("SXT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!("SXT_THREADS must be a positive integer, got {v:?}"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn run(cli: Cli) -> CmdResult<bool> {
    set_threads()?;
    let (name, io) = match &cli.command {
        Command::VerifyExtractor(io) => ("verify-extractor", io),
        Command::ReduceSmallspace(io) => ("reduce-smallspace", io),
        Command::SumsetPipeline(io) => ("sumset-pipeline", io),
        Command::Analyze(io) => ("analyze", io),
    };
    let text = std::fs::read_to_string(&io.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", io.config.display())))?;
    let config: Value = serde_json::from_str(&text)?;
    let outcome = match cli.command {
        Command::VerifyExtractor(_) => commands::extractor::run(&config, io.trace)?,
        Command::ReduceSmallspace(_) => commands::smallspace::run(&config, io.trace)?,
        Command::SumsetPipeline(_) => commands::sumset::run(&config, io.trace)?,
        Command::Analyze(_) => commands::analyze::run(&config, io.trace)?,
    };
    let body = report::render(name, &config, &outcome);
    std::fs::write(&io.out, body)
        .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", io.out.display())))?;
    for v in &outcome.violations {
        eprintln!("violation: {v}");
    }
    Ok(outcome.violations.is_empty())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(m)) => {
            eprintln!("resource cap: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
