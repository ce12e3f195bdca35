//! Command-line front end for the self-triggered MDP toolkit.
//!
//! Exit codes: 0 success, 1 I/O, 2 usage, 3 parse or document mismatch,
//! 4 solver non-convergence, 5 guarantee violation.

mod args;
mod commands;
mod document;
mod render;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Convergence(String),
    #[error("{0}")]
    Guarantee(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Convergence(_) => 4,
            CliError::Guarantee(_) => 5,
        }
    }
}

impl From<stmdp::mdp::SolveError> for CliError {
    fn from(e: stmdp::mdp::SolveError) -> Self {
        match e {
            stmdp::mdp::SolveError::NotConverged { .. } => CliError::Convergence(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<stmdp::trigger::TriggerError> for CliError {
    fn from(e: stmdp::trigger::TriggerError) -> Self {
        match e {
            stmdp::trigger::TriggerError::NotConverged { .. } => {
                CliError::Convergence(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<stmdp::sim::SimError> for CliError {
    fn from(e: stmdp::sim::SimError) -> Self {
        match e {
            stmdp::sim::SimError::Trigger(inner) => inner.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(args) => commands::cmd_solve(args),
        Command::Guarantee(args) => commands::cmd_guarantee(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Render(args) => commands::cmd_render(args),
        Command::Export(args) => commands::cmd_export(args),
        Command::Import(args) => commands::cmd_import(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
