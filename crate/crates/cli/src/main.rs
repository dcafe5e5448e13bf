//! `hv`: value-of-history experiments from a JSON config.
//!
//! Exit codes: 0 success, 2 usage, 10 parse, 11 invalid input, 12 cap
//! exceeded, 13 internal, 14 a checked property failed.

mod commands;
mod config;
mod error;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::config::{Overrides, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Payoffs and values of history for one structure.
    Value,
    /// Ternary split, dominance and optimal structures.
    Design,
    /// Prices and surpluses in the market for history.
    Market,
    /// Dominance check over a seeded corpus or one structure.
    Verify,
    /// Optimal structures over a (delta, alpha, t) grid, as CSV.
    Sweep,
}

#[derive(Debug, Parser)]
#[command(
    name = "hv",
    version,
    about = "Value of history in sequential social learning"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Write the report here; a `.csv` extension selects the CSV form.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Tolerance as a decimal or `num/den`.
    #[arg(long)]
    tol: Option<String>,
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn print(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        horizon: cli.horizon,
        tol: cli.tol.clone(),
    };
    let config = RunConfig::load(&cli.config, &overrides)?;
    let output = match cli.command {
        Command::Value => commands::run_value(&config)?,
        Command::Design => commands::run_design(&config)?,
        Command::Market => commands::run_market(&config)?,
        Command::Verify => commands::run_verify(&config)?,
        Command::Sweep => commands::run_sweep_command(&config)?,
    };

    if cli.command == Command::Sweep {
        let csv = output.csv.as_deref().unwrap_or_default();
        match &cli.out {
            Some(path) => {
                write_file(path, csv)?;
                print(&output.json)?;
            }
            None => {
                print(csv)?;
                eprint!("{}", output.json);
            }
        }
    } else {
        match &cli.out {
            Some(path) if path.extension().is_some_and(|e| e == "csv") => {
                write_file(path, output.csv.as_deref().unwrap_or_default())?
            }
            Some(path) => write_file(path, &output.json)?,
            None => print(&output.json)?,
        }
    }
    match output.failure {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
