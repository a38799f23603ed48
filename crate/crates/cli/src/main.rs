use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use nbw_cli::{run, Cli, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if cli.output.is_none() {
                let _ = std::io::stdout().write_all(outcome.body.as_bytes());
            }
            if outcome.status != Status::Pass {
                eprintln!("nbw: exit {} ({:?})", outcome.status.code(), outcome.status);
            }
            ExitCode::from(outcome.status.code())
        }
        Err(e) => {
            eprintln!("nbw: {e}");
            ExitCode::from(e.status.code())
        }
    }
}
