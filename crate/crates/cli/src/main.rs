//! Command-line front end for the reduced-order-modeling workbench.
//!
//! Orchestrates the pipeline `simulate` → `pod` / `train` → `evaluate`
//! (or the propagation-only `propagate`), with every experiment pinned by a
//! single flat configuration file. Exit codes are part of the contract:
//! 0 success, 1 runtime failure (divergence included), 2 configuration or
//! input-validation error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qgrom_core::ae::train::LossKind;
use qgrom_core::error::Error;

use config::Preset;

#[derive(Parser)]
#[command(
    name = "qgrom",
    about = "Quasi-geostrophic flow: full-order solver, reduced models, and their evaluation"
)]
struct Cli {
    /// Configuration file (flat key=value lines, # comments).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in configuration scale applied before the config file.
    #[arg(long, global = true, value_enum)]
    preset: Option<PresetArg>,

    /// Overrides train.seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Overrides paths.workdir.
    #[arg(long, global = true, value_name = "PATH")]
    workdir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Paper,
    Ci,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Mse,
    Pi,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the full-order model and store the snapshot trajectory.
    Simulate,
    /// Build the projection basis and quadratic reduced dynamics per order.
    Pod,
    /// Train autoencoder models per order.
    Train {
        /// Objective; overrides train.loss.
        #[arg(long, value_enum)]
        loss: Option<LossArg>,
    },
    /// Score stored models: energy ratios and propagation errors.
    Evaluate,
    /// Propagation-only scoring with its own CSV.
    Propagate,
}

/// True for errors caused by the user's configuration or input artifacts,
/// as opposed to failures during the numerics.
fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidConfig { .. }
            | Error::GridTooSmall { .. }
            | Error::BadExtents { .. }
            | Error::GridMismatch { .. }
            | Error::ValueCount { .. }
            | Error::MissingArtifact { .. }
            | Error::FileFormat { .. }
            | Error::RankDeficient { .. }
    )
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = config::load(
        cli.preset.map(|p| match p {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Ci => Preset::Ci,
        }),
        cli.config.as_deref(),
        cli.seed,
        cli.workdir.as_deref(),
    )?;
    match cli.command {
        Command::Simulate => commands::simulate::run(&cfg),
        Command::Pod => commands::pod::run(&cfg),
        Command::Train { loss } => commands::train::run(
            &cfg,
            loss.map(|l| match l {
                LossArg::Mse => LossKind::Mse,
                LossArg::Pi => LossKind::Pi,
            }),
        ),
        Command::Evaluate => commands::evaluate::run(&cfg),
        Command::Propagate => commands::evaluate::run_propagate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_input_error(&e) { 2 } else { 1 })
        }
    }
}
