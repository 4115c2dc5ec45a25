mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;
use manifest::{RunManifest, RunPlan};

fn run(cli: Cli) -> Result<(), Failure> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::KappaHist { args, out } => commands::execute(&RunPlan::KappaHist(args), &out.resolve(), &mut stdout),
        Command::SerCurve { args, out } => commands::execute(&RunPlan::SerCurve(args), &out.resolve(), &mut stdout),
        Command::Optimize { args, out } => commands::execute(&RunPlan::Optimize(args), &out.resolve(), &mut stdout),
        Command::Pathloss(args) => commands::pathloss(&args, &mut stdout),
        Command::Replay { manifest, out } => {
            let recorded = RunManifest::read(&manifest).map_err(|e| Failure::Usage(format!("{e:#}")))?;
            commands::execute(&recorded.run, &out.resolve(), &mut stdout)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
