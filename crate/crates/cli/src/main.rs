//! `qising`: barrier, critical-set and crossover-time analysis for the Ising
//! model on the hypercube.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypercube_ising::Error;

use config::{CommandKind, CommonArgs, DynamicsArgs, RunConfig, SimulationArgs};

#[derive(Parser)]
#[command(name = "qising", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Barrier height, critical set and prefactor.
    Analyze(CommonArgs),
    /// Exhaustive checks of the landscape at n <= 4.
    Verify(CommonArgs),
    /// Kinetic Monte Carlo estimate of the crossover time.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        dynamics: DynamicsArgs,
        #[command(flatten)]
        sim: SimulationArgs,
    },
    /// Exact expected crossover times, n <= 4.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        dynamics: DynamicsArgs,
    },
    /// Re-run the configuration embedded in a JSON report.
    Replay {
        report: PathBuf,
        /// Compare with the report instead of writing; exit 1 on difference.
        #[arg(long)]
        check: bool,
    },
}

/// Exit status for a failed run.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::InadmissibleField { .. } => 2,
        Error::Capability(_) => 3,
        Error::Precision { .. } => 4,
        Error::Budget { .. } => 5,
        Error::InvariantViolation(_) => 1,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.command {
        Command::Analyze(c) => RunConfig::new(CommandKind::Analyze, &c, None, None),
        Command::Verify(c) => RunConfig::new(CommandKind::Verify, &c, None, None),
        Command::Simulate {
            common,
            dynamics,
            sim,
        } => RunConfig::new(CommandKind::Simulate, &common, Some(&dynamics), Some(&sim)),
        Command::Solve { common, dynamics } => {
            RunConfig::new(CommandKind::Solve, &common, Some(&dynamics), None)
        }
        Command::Replay { report, check } => return replay(&report, check),
    };
    match output::execute(&cfg) {
        Ok(run) => match output::emit(&cfg, &run.text) {
            Ok(()) => ExitCode::from(run.status),
            Err(e) => fail(&e),
        },
        Err(e) => fail(&e),
    }
}

fn replay(path: &PathBuf, check: bool) -> ExitCode {
    let cfg = match output::read_config(path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let run = match output::execute(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if check {
        let same = std::fs::read_to_string(path).is_ok_and(|old| old == run.text);
        println!("{}", if same { "identical" } else { "differs" });
        return ExitCode::from(if same { 0 } else { 1 });
    }
    match output::emit(&cfg, &run.text) {
        Ok(()) => ExitCode::from(run.status),
        Err(e) => fail(&e),
    }
}
