//! `qgf`: VQE runs, spectral functions and Galitskii–Migdal sampling studies.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunConfig, Settings};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qgf", version, about = "Green's functions from sampled ancilla circuits")]
struct Cli {
    /// TOML file with the same keys as the flags; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize an ansatz and write the result and trace
    Vqe(Settings),
    /// Spectral function A(ω) from an exact or sampled Green's function
    Spectrum(Settings),
    /// Scatter of ΔE1 and ΔE2 over repeated sampled runs
    GmStudy(Settings),
}

type Op = fn(&RunConfig) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (settings, op): (Settings, Op) = match cli.command {
        Command::Vqe(s) => (s, commands::vqe),
        Command::Spectrum(s) => (s, commands::spectrum),
        Command::GmStudy(s) => (s, commands::gm_study),
    };
    let settings = match &cli.config {
        Some(path) => settings.or(Settings::from_file(path)?),
        None => settings,
    };
    op(&RunConfig::resolve(settings)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
