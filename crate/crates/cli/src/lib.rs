//! Command-line surface of the `vmw` toolkit: argument types, commands and the acceptance suites.

pub mod args;
pub mod commands;
pub mod output;
pub mod suites;

use thiserror::Error;

pub use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or quantum numbers; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// A verification ran and failed; exit status 1.
    #[error("{0}")]
    Check(String),
    #[error(transparent)]
    Compute(#[from] vmw::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Input validation failures from the library become usage errors.
pub(crate) fn usage(e: vmw::Error) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Cg(a) => commands::cmd_cg(a),
        Command::Wigd(a) => commands::cmd_wigd(a),
        Command::Wavepacket(a) => commands::cmd_wavepacket(a),
        Command::Precess(a) => commands::cmd_precess(a),
        Command::Correlate(a) => commands::cmd_correlate(a),
        Command::Verify(a) => commands::cmd_verify(a),
    }
}
