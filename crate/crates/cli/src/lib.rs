//! Command-line front end: threshold curves, rate tables, cross-checks and
//! Monte Carlo runs, written as CSV or JSON.

pub mod args;
pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use args::{Cli, Command};

/// Exit code for malformed or out-of-domain flags.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for a solver failure or a failed check.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Domain and configuration errors are the caller's flags; anything
    /// else is a numerical failure.
    pub fn from_core(e: pldp_core::Error) -> Self {
        match e {
            pldp_core::Error::Domain(_) | pldp_core::Error::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            // Help and version go to stdout with exit 0.
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Pt(a) => commands::pt(a, out, err),
        Command::Ldp(a) => commands::ldp(a, out, err),
        Command::Verify(v) => commands::verify(v, out),
        Command::Sim(a) => commands::sim(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
