mod error;
mod grid;
mod lattice;
mod output;
mod perf;
mod rates;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

/// GKP code numerics under pure loss and amplification.
#[derive(Parser)]
#[command(name = "gkplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice reports.
    #[command(subcommand)]
    Lattice(lattice::LatticeCommand),
    /// Infidelity sweep over channel strength, lattice and energy.
    Perf(perf::PerfArgs),
    /// Achievable-rate curves.
    Rates(rates::RatesArgs),
    /// Cross-check the analytic formulas against independent oracles.
    Verify(verify::VerifyArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Lattice(c) => lattice::run(c),
        Command::Perf(a) => perf::run(a),
        Command::Rates(a) => rates::run(a),
        Command::Verify(a) => verify::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::USAGE } else { error::OK });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(error::OK),
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed(_)) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.code())
        }
    }
}
