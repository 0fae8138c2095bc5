//! `hybridtp` command-line driver.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, Flags, Settings};

#[derive(Debug, Parser)]
#[command(name = "hybridtp", version, about = "Controlled teleportation through a hybrid entangled channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// First- and second-order fidelities over a phase grid
    FidelitySweep,
    /// Wigner function of mode B after conditioning C and D
    WignerGrid,
    /// All eight measurement branches with their corrections
    ProtocolRun,
    /// Four-qubit circuit experiment with seeded shot sampling
    CircuitRun,
    /// Summary numbers for a resource state
    ResourceInfo,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::FidelitySweep => "fidelity-sweep",
            Command::WignerGrid => "wigner-grid",
            Command::ProtocolRun => "protocol-run",
            Command::CircuitRun => "circuit-run",
            Command::ResourceInfo => "resource-info",
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<hybridtp::Error>() {
            return match e {
                hybridtp::Error::InsufficientCutoff { .. }
                | hybridtp::Error::Normalization(..)
                | hybridtp::Error::ZeroProbability => EXIT_NUMERIC,
                _ => EXIT_CONFIG,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return EXIT_IO;
        }
    }
    1
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let s = Settings::resolve(cli.command.name(), &cli.flags)?;
    match cli.command {
        Command::FidelitySweep => commands::fidelity_sweep(&s),
        Command::WignerGrid => commands::wigner_grid(&s),
        Command::ProtocolRun => commands::protocol_run(&s),
        Command::CircuitRun => commands::circuit_run(&s),
        Command::ResourceInfo => commands::resource_info(&s),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
