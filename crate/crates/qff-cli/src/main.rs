//! `qff`: filter-function analysis of driven two-level systems.
//!
//! Subcommands emit plot-ready CSV/JSON plus a `.manifest.json` describing
//! inputs, parameters and output checksums. Exit codes: 0 success, 1 failed
//! verification, 2 invalid input, 3 numerical failure.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "qff",
    version,
    about = "Filter functions, space curves and Magnus analysis of driven qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the complex filter function over a frequency grid.
    Ff(commands::ff::FfArgs),
    /// Emit the 3D space curve for one or more perturbation phases.
    Curve(commands::curve::CurveArgs),
    /// Magnus terms of the interaction-frame propagator.
    Magnus(commands::magnus::MagnusArgs),
    /// Extract synchronous control parameters from filter-function peaks.
    Controls(commands::controls::ControlsArgs),
    /// Overlap a filter-function sweep with a noise PSD.
    Chi(commands::chi::ChiArgs),
    /// Export the drive propagator trace as CSV.
    Trace(commands::trace::TraceArgs),
    /// Search for driving fields with Kth-order quasistatic cancellation.
    Optimize(commands::optimize::OptimizeArgs),
    /// Verify first-order predictions against the brute-force simulator.
    Verify(commands::verify::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ff(args) => commands::ff::run(args),
        Command::Curve(args) => commands::curve::run(args),
        Command::Magnus(args) => commands::magnus::run(args),
        Command::Controls(args) => commands::controls::run(args),
        Command::Chi(args) => commands::chi::run(args),
        Command::Trace(args) => commands::trace::run(args),
        Command::Optimize(args) => commands::optimize::run(args),
        Command::Verify(args) => commands::verify::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<qff_core::Error>() {
        Some(core) => match core.kind() {
            qff_core::ErrorKind::Input => 2,
            qff_core::ErrorKind::Numerical => 3,
        },
        None => 2,
    }
}
