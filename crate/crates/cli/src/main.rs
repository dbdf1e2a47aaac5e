//! `duopoly`: solve, certify, simulate and sweep price equilibria of markets
//! whose sellers have random availability.
//!
//! Exit status is 0 on success, 2 for invalid input, 3 when a result fails
//! verification and 4 on numerical failure.

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;
use output::Sink;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("duopoly: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    cli.run.validate()?;
    if let Some(jobs) = cli.run.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::config(format!("flag --jobs: {e}")))?;
    }
    let is_sweep = matches!(cli.command, Command::SweepAsymptotic(_));
    let sink = Sink {
        out: cli.run.out.clone(),
        format: cli.run.format.unwrap_or(commands::default_format(is_sweep)),
        timestamp: cli.run.timestamp,
    };
    match &cli.command {
        Command::SolveSym => commands::solve_sym(&cli.market, &cli.run, &sink),
        Command::SolveAsym => commands::solve_asym(&cli.market, &cli.run, &sink),
        Command::Certify(a) => commands::certify_cmd(a, &cli.market, &cli.run, &sink),
        Command::Simulate(a) => commands::simulate_cmd(a, &cli.market, &cli.run, &sink),
        Command::SweepAsymptotic(a) => commands::sweep(a, &cli.market, &sink),
        Command::Oligopoly(a) => commands::oligopoly(a, &cli.market, &cli.run, &sink),
    }
}
