use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qhd_harness::cli::{Cli, Command};
use qhd_harness::commands;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Classify(a) => commands::classify(a, &mut out),
        Command::Symbol(a) => commands::symbol(a, &mut out),
        Command::Check(a) => commands::check(a, &mut out),
        Command::LinearDecay(a) => commands::linear_decay(a, &mut out),
        Command::Simulate(a) => commands::simulate(a, &mut out),
        Command::Accept(a) => commands::accept(a, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
