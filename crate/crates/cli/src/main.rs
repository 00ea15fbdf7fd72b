//! Command-line front end: simulate particle paths, tabulate orthogonal
//! polynomial zeros, and run the martingale / characteristic-polynomial /
//! density-oracle / harmonicity checks with reproducible seeds and
//! machine-readable output.

mod args;
mod commands;
mod manifest;
mod output;

use clap::{Parser, Subcommand};
use commands::{CommandError, Outcome};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "weylsim",
    version,
    about = "Interacting-particle diffusions on Weyl chambers: simulation and verification",
    after_help = "Exit codes: 0 success/PASS, 1 statistical FAIL, 2 usage error, 3 numerical failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ordered zeros of a Hermite or Laguerre polynomial with their
    /// equilibrium residuals.
    Zeros(args::ZerosArgs),
    /// Simulate paths and emit a CSV of normalized coordinates.
    Simulate(args::SimulateArgs),
    /// Check that a symmetric-function martingale stays flat.
    MartingaleCheck(args::MartingaleArgs),
    /// Compare the Monte-Carlo expected characteristic polynomial with its
    /// closed form (corner start).
    Charpoly(args::CharpolyArgs),
    /// Compare density-based importance-sampling moments with the closed
    /// forms, bypassing the SDE.
    Oracle(args::OracleArgs),
    /// Finite-difference space-time-harmonicity residual of a compensator.
    HarmonicCheck(args::HarmonicArgs),
    /// Re-execute a recorded run manifest.
    Replay(args::ReplayArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Zeros(a) => commands::cmd_zeros(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::MartingaleCheck(a) => commands::cmd_martingale_check(a),
        Command::Charpoly(a) => commands::cmd_charpoly(a),
        Command::Oracle(a) => commands::cmd_oracle(a),
        Command::HarmonicCheck(a) => commands::cmd_harmonic_check(a),
        Command::Replay(a) => commands::cmd_replay(a),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(CommandError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CommandError::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(CommandError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(3)
        }
    }
}
