//! Library half of the `nbw` command-line tool. Every subcommand returns an
//! [`Outcome`]; `main` only prints it and maps it to an exit code.

pub mod args;
pub mod audit;
pub mod commands;
pub mod output;
pub mod parse;

use std::fmt;

pub use args::{Cli, Command, Format};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass = 0,
    Violation = 1,
    Usage = 2,
    /// Horizon or resource cap reached before an answer.
    Exhausted = 3,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            status: Status::Usage,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<nbw_core::Error> for CliError {
    fn from(e: nbw_core::Error) -> Self {
        use nbw_core::Error as E;
        let status = match &e {
            E::CapExceeded { .. } => Status::Exhausted,
            E::Numerical(_) => Status::Violation,
            _ => Status::Usage,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

/// A finished run: the rendered output and the status to exit with.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub body: String,
}

/// Runs a parsed command line, writing `--output` if given.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    nbw_core::sampler_clt::init_threads_from_env()?;
    let cli = resolve(cli)?;
    let outcome = commands::dispatch(&cli)?;
    if let Some(path) = &cli.output {
        std::fs::write(path, &outcome.body)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(outcome)
}

/// Replaces `replay` by the stored configuration and fixes the format.
fn resolve(cli: &Cli) -> Result<Cli, CliError> {
    let mut cli = match &cli.command {
        Command::Replay(r) => {
            let text = std::fs::read_to_string(&r.config)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", r.config.display())))?;
            let value: serde_json::Value = match output::strip_csv_header(&text) {
                Some(config) => config,
                None => serde_json::from_str(&text).map_err(|e| CliError::usage(format!("bad config: {e}")))?,
            };
            let value = value.get("config").cloned().unwrap_or(value);
            let mut stored: Cli =
                serde_json::from_value(value).map_err(|e| CliError::usage(format!("bad config: {e}")))?;
            if matches!(stored.command, Command::Replay(_)) {
                return Err(CliError::usage("a replayed configuration cannot itself be a replay"));
            }
            if cli.output.is_some() {
                stored.output = cli.output.clone();
            }
            stored.no_timestamp |= cli.no_timestamp;
            stored
        }
        _ => cli.clone(),
    };
    cli.format = Some(cli.format.unwrap_or_else(|| cli.command.default_format()));
    Ok(cli)
}
