use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = eqc::Cli::parse();
    match eqc::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
