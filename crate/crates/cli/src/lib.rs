//! `fidcoh` command-line front end.
//!
//! Exit codes: 0 success, 1 domain-false (not transformable, suite failed),
//! 2 validation or unsupported input, 3 I/O or parse error.

pub mod commands;
pub mod files;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::Cli;

/// Environment variable supplying the default `--seed`.
pub const SEED_ENV: &str = "FIDCOH_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_INVALID,
            CliError::Io(_) | CliError::Parse(_) => EXIT_IO,
        }
    }
}

impl From<fidelity_coherence::Error> for CliError {
    fn from(e: fidelity_coherence::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
