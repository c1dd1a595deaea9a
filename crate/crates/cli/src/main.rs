mod config;
mod fit;
mod simulate;

use clap::Parser;

use crate::config::{Cli, Command};

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fit(args) => fit::run(args),
        Command::Simulate(args) => simulate::run(args, false),
        Command::Sweep(args) => simulate::run(args, true),
    }
}
