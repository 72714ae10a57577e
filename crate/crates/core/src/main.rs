use std::process::ExitCode;

use clap::Parser;
use crpower::cli::{exit_code, main_with, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_with(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("crpower: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
