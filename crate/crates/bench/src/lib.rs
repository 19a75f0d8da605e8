//! Benchmark harness behind the `hhcr` binary.

pub mod cli;
pub mod commands;
pub mod io;

use anyhow::Result;

use cli::{Cli, Command};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Grid(a) => commands::grid(a),
        Command::Export(a) => commands::export(a),
        Command::Gap(a) => commands::gap_cmd(a),
        Command::Oracle(a) => commands::oracle(a),
    }
}
