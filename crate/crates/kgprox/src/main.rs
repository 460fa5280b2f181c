use std::process::ExitCode;

use clap::Parser;
use kgprox::cli::{run, Cli};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kgprox: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
