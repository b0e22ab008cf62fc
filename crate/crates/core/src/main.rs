use clap::Parser;
use hazode::cli::{run, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hazode: {e}");
            ExitCode::from(e.code)
        }
    }
}
