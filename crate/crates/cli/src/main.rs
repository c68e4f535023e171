//! `accelsched`: analysis, optimization, enumeration and simulation of
//! real-time task sets on a multicore with a shared accelerator.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use accelsched::oracle::EnumerationBudget;
use accelsched::JitterMode;
use clap::{Parser, Subcommand, ValueEnum};

use commands::Exit;
use manifest::{CommonOpts, RunManifest};

#[derive(Parser)]
#[command(name = "accelsched", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Clone, Copy, ValueEnum)]
enum Jitter {
    Conservative,
    Exact,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance and print its summary.
    Validate {
        /// Instance: a JSON file, builtin:<name> or random:<seed>.
        instance: String,
    },
    /// Analyze a fixed assignment with both response-time analyses.
    Analyze {
        instance: String,
        /// Assignment JSON file, or `published-rr` for the bundled WATERS instances.
        #[arg(long)]
        assignment: String,
        /// Jitter model of the checkpoint analysis.
        #[arg(long, value_enum, default_value = "conservative")]
        jitter: Jitter,
    },
    /// Find the best mapping, priorities and acceleration choices.
    Optimize { instance: String },
    /// Solve a small instance by enumeration and compare with the solver.
    Oracle {
        instance: String,
        /// Skip the solver cross-check.
        #[arg(long)]
        no_cross_check: bool,
        /// Refuse instances with more candidates than this.
        #[arg(long, default_value_t = 2_000_000)]
        max_candidates: u128,
    },
    /// Simulate an assignment and compare observed and analytical response times.
    Simulate {
        instance: String,
        #[arg(long)]
        assignment: String,
        /// Number of runs: the first is synchronous, the rest jittered.
        #[arg(long, default_value_t = 1)]
        runs: u32,
        /// Release horizon in microseconds (default: hyperperiod, capped).
        #[arg(long)]
        horizon: Option<u64>,
        /// Write the first run's events as JSON lines.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Write the first run's per-job response times as CSV.
        #[arg(long)]
        jobs_out: Option<PathBuf>,
    },
    /// Optimize every policy/objective pair and tabulate the results.
    Report { instance: String },
}

fn run(cli: Cli) -> anyhow::Result<Exit> {
    let manifest = |instance: &str| RunManifest::resolve(instance, &cli.common);
    match &cli.command {
        Command::Validate { instance } => commands::validate::run(&manifest(instance)?),
        Command::Analyze { instance, assignment, jitter } => {
            let mode = match jitter {
                Jitter::Conservative => JitterMode::Conservative,
                Jitter::Exact => JitterMode::Exact,
            };
            commands::analyze::run(&manifest(instance)?, assignment, mode)
        }
        Command::Optimize { instance } => commands::optimize::run(&manifest(instance)?),
        Command::Oracle { instance, no_cross_check, max_candidates } => {
            let budget = EnumerationBudget { hard_cap: *max_candidates, ..EnumerationBudget::default() };
            commands::oracle::run(&manifest(instance)?, !no_cross_check, &budget)
        }
        Command::Simulate { instance, assignment, runs, horizon, trace_out, jobs_out } => {
            let opts = commands::simulate::SimOpts {
                assignment: assignment.clone(),
                runs: *runs,
                horizon: *horizon,
                trace_out: trace_out.clone(),
                jobs_out: jobs_out.clone(),
            };
            commands::simulate::run(&manifest(instance)?, &opts)
        }
        Command::Report { instance } => commands::report::run(&manifest(instance)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Exit::Error as u8)
        }
    }
}
