//! Command-line front end: configuration handling, subcommands and output
//! writers for the `esdsim` binary.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] esd_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit code: 2 for usage and parameter errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                esd_core::Error::InvalidBath(_)
                | esd_core::Error::InvalidState(_)
                | esd_core::Error::InvalidArgument(_)
                | esd_core::Error::SpecError(_),
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "esdsim", version, about = "Two-qubit entanglement dynamics in an Ohmic bath")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write Δ(t), γ(t) and their Markovian limits, one file per (r, kT)
    Coefficients(CommonArgs),
    /// Evolve one initial state and report entanglement sudden death
    Evolve(CommonArgs),
    /// Run a parameter sweep for a scenario
    Sweep(CommonArgs),
    /// Evolve under the open-loop temperature controller, with an alpha = 0 baseline
    Control(CommonArgs),
    /// Run the built-in consistency checks
    Validate(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Coefficients(_) => "coefficients",
            Command::Evolve(_) => "evolve",
            Command::Sweep(_) => "sweep",
            Command::Control(_) => "control",
            Command::Validate(_) => "validate",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Coefficients(a)
            | Command::Evolve(a)
            | Command::Sweep(a)
            | Command::Control(a)
            | Command::Validate(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Configuration file (key = value lines, optional [subcommand] sections)
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Override a configuration key; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_parser = ["markov", "nonmarkov", "both"])]
    pub mode: Option<String>,
    /// Final time, in units of 1/omega0
    #[arg(long, value_name = "T")]
    pub horizon: Option<f64>,
    /// Output time step
    #[arg(long, value_name = "DT")]
    pub grid: Option<f64>,
}

pub fn settings_for(command: &Command) -> Result<Settings, CliError> {
    let args = command.args();
    Settings::resolve(
        command.name(),
        args.config.as_deref(),
        &args.set,
        &[
            ("mode", args.mode.clone()),
            ("horizon", args.horizon.map(|v| v.to_string())),
            ("grid", args.grid.map(|v| v.to_string())),
        ],
    )
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let settings = settings_for(&cli.command)?;
    let out = &cli.command.args().out;
    match &cli.command {
        Command::Coefficients(_) => commands::cmd_coefficients(&settings, out),
        Command::Evolve(_) => commands::cmd_evolve(&settings, out),
        Command::Sweep(_) => commands::cmd_sweep(&settings, out),
        Command::Control(_) => commands::cmd_control(&settings, out),
        Command::Validate(_) => commands::cmd_validate(&settings, out),
    }
}
