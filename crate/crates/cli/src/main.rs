//! `dfkg`: simulations, resolvent and observability scans, rate fits and
//! verification suites for the damped fractional Klein-Gordon equation.
//!
//! Exit status: 0 all checks pass, 1 a check failed, 2 configuration error,
//! 3 numerical guard tripped.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dfkg_core::verify::CheckResult;

use config::{ConfigFile, ObservabilityFlags, RateFitFlags, ResolventFlags, SimulateFlags, VerifyFlags};
use output::OutputDir;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Guard(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Guard(m) => write!(f, "numerical guard: {m}"),
        }
    }
}

impl From<dfkg_core::Error> for CliError {
    fn from(e: dfkg_core::Error) -> Self {
        if e.is_numerical_guard() {
            CliError::Guard(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "dfkg", version, about = "Damped fractional Klein-Gordon toolkit")]
struct Cli {
    /// Config file with a [command] section of key = value pairs
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV, SVG and summary files
    #[arg(long, global = true, default_value = "out")]
    output: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the damped equation and fit the energy decay
    Simulate(SimulateFlags),
    /// Resolvent norms along the imaginary axis
    ResolventScan(ResolventFlags),
    /// Observability constants over a range of lambda
    ObservabilityScan(ObservabilityFlags),
    /// Fit a power law or exponential to two columns of a CSV file
    RateFit(RateFitFlags),
    /// Run the invariant or acceptance suite
    Verify(VerifyFlags),
    /// Tabulate summary files
    Report {
        /// Summary files or output directories; defaults to --output
        inputs: Vec<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<Vec<CheckResult>, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let out = OutputDir::create(&cli.output)?;
    let checks = match &cli.command {
        Command::Simulate(flags) => commands::simulate(&file.resolve("simulate", flags)?, &out)?,
        Command::ResolventScan(flags) => commands::resolvent_scan(&file.resolve("resolvent-scan", flags)?, &out)?,
        Command::ObservabilityScan(flags) => commands::observability_scan(&file.resolve("observability-scan", flags)?, &out)?,
        Command::RateFit(flags) => commands::rate_fit(&file.resolve("rate-fit", flags)?)?,
        Command::Verify(flags) => commands::verify(&file.resolve("verify", flags)?)?,
        Command::Report { inputs } => return commands::report(inputs, &out),
    };
    for c in &checks {
        println!("{}", c.line());
    }
    let path = out.write_summary(&checks)?;
    println!("summary written to {}", path.display());
    Ok(checks)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(checks) => {
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else if checks.iter().any(|c| !c.pass && c.numerical_guard) {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("dfkg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
