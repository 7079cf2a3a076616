use std::process::ExitCode;

use clap::Parser;
use prevalence_cli::args::{Cli, Command};
use prevalence_cli::commands;

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let summary = match &cli.command {
        Command::Simulate(args) => commands::simulate(args)?,
        Command::Calibrate(args) => commands::calibrate(args)?,
        Command::Extrapolate(args) => commands::extrapolate(args)?,
        Command::Series(args) => commands::series(args)?,
        Command::Experiment(args) => {
            let (summary, ok) = commands::experiment(args)?;
            print!("{summary}");
            return Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
    };
    println!("{summary}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
