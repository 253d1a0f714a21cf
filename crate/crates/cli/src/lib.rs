//! Front end for the hedgehog solvers: run configuration, the `solve`,
//! `sweep`, `convert` and `check` commands, and their on-disk formats.
//!
//! Exit statuses: 0 success, 1 configuration or input error, 2 solver
//! failure, 3 failed certificate, 4 partial sweep failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod io;

use args::{Cli, Command};
use commands::Status;

/// Runs the parsed command line.
pub fn run(cli: &Cli) -> Status {
    let cfg = match cli.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Status::Config;
        }
    };
    match &cli.command {
        Command::Solve { .. } => commands::cmd_solve(&cfg),
        Command::Sweep { .. } => commands::cmd_sweep(&cfg),
        Command::Convert { material, .. } => commands::cmd_convert(&cfg, material),
        Command::Check { profile, .. } => commands::cmd_check(&cfg, profile),
    }
}
