//! `symwalk`: distance profiles, bound verification and fixed-point simulations.

mod commands;
mod error;
mod grid;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{Outcome, ProfileArgs, SimulateArgs, VerifyArgs};
use crate::error::CliError;

const MIN_PRECISION: usize = 32;
const MAX_PRECISION: usize = 8192;

#[derive(Parser, Debug)]
#[command(name = "symwalk", version, about = "Random walks on the symmetric group: exact distances, bounds and simulations")]
struct Cli {
    /// Working precision in bits for high-precision sums.
    #[arg(long, global = true, default_value_t = 128)]
    precision: usize,
    /// Worker threads (default: all cores). SYMWALK_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// d2 distance to uniform along a time grid.
    Profile(ProfileArgs),
    /// Check theorem bounds, lemma sweeps or the brute-force oracle; exits 1 on any failure.
    Verify(VerifyArgs),
    /// Monte Carlo lower bound on total variation from fixed points.
    Simulate(SimulateArgs),
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var("SYMWALK_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::usage(format!("SYMWALK_THREADS must be a non-negative integer, got '{v}'"))),
        _ => Ok(flag),
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if !(MIN_PRECISION..=MAX_PRECISION).contains(&cli.precision) {
        return Err(CliError::usage(format!(
            "--precision must lie in {MIN_PRECISION}..={MAX_PRECISION}, got {}",
            cli.precision
        )));
    }
    if let Some(k) = thread_count(cli.threads)?.filter(|&k| k > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot start thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Profile(a) => commands::profile(a, cli.precision),
        Command::Verify(a) => commands::verify(a, cli.precision),
        Command::Simulate(a) => commands::simulate(a, cli.precision),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
