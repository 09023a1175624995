//! Batch command-line surface for the calibration engine.

mod commands;
mod config;
mod io;

use std::process::ExitCode;

use bsscal_core::CoreError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bsscal",
    version,
    about = "Calibrate expensive simulators against experimental data \
             with a functional-ANOVA Gaussian-process emulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the calibration sampler and write posterior tables.
    Calibrate(commands::calibrate::Args),
    /// Predict at new input points from a samples file.
    Predict(commands::predict::Args),
    /// Total-effect sensitivity indices of the fitted emulator.
    Sa(commands::sa::Args),
    /// Leave-one-group-out cross-validation.
    Cv(commands::cv::Args),
    /// Truth-known simulation study.
    Study(commands::study::Args),
    /// Dump the Karhunen-Loeve basis tables.
    Basis(commands::basis::Args),
}

fn exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::InvalidArgument(_) | CoreError::Validation(_) | CoreError::Config(_) => 1,
        CoreError::NumericalFailure { .. } => 2,
        CoreError::Io(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed;
            // genuine usage errors are validation failures.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Calibrate(args) => commands::calibrate::run(args),
        Command::Predict(args) => commands::predict::run(args),
        Command::Sa(args) => commands::sa::run(args),
        Command::Cv(args) => commands::cv::run(args),
        Command::Study(args) => commands::study::run(args),
        Command::Basis(args) => commands::basis::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
