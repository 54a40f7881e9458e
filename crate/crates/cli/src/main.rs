mod args;
mod commands;
mod error;
mod order;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Vec::new();
    let result = match &cli.command {
        Command::Region(a) => commands::region(a, &mut out),
        Command::Synthesize(a) => commands::synthesize(a, &mut out),
        Command::Verify(a) => commands::verify(a, &mut out),
        Command::Simulate(a) => commands::simulate(a, &mut out),
    };
    // reports are printed even when verification fails
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(&out).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(error::EXIT_FAILURE as u8);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
