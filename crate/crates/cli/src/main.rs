//! `qbound`: batch front end for bound verification, trajectory evolution,
//! counterexample search and the worked demonstration cases.
//!
//! Exit codes: 0 success, 1 a checked mathematical claim failed (or a search
//! did not succeed), 2 bad input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod demo;
mod evolve;
mod manifest;
mod output;
mod search;
mod verify;

#[derive(Debug, Parser)]
#[command(
    name = "qbound",
    version,
    about = "Quantum battery charging-power bound toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo check of the corrected bound on random instances.
    Verify(verify::VerifyArgs),
    /// Evolve a scenario and write the per-time report.
    Evolve(evolve::EvolveArgs),
    /// Search for zero-power or bound-saturating instances.
    Search(search::SearchArgs),
    /// Print one of the built-in worked cases.
    Demo(demo::DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, default_value_t = default_threads())]
    pub threads: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

/// Error raised for malformed input; maps to exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<qbattery::Error>() {
        Some(qbattery::Error::Integrity { .. }) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify::run(a),
        Command::Evolve(a) => evolve::run(a),
        Command::Search(a) => search::run(a),
        Command::Demo(a) => demo::run(a),
    };
    match result {
        Ok(Status::Passed) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
