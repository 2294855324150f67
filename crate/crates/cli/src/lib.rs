//! Front end for the `squeezed` binary: configuration handling, task
//! dispatch and artifact writing.

use std::fmt;

pub mod config;
pub mod run;
pub mod sweep;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for bad input.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self { code: EXIT_USAGE, message }
    }

    pub fn numeric(message: String) -> Self {
        Self { code: EXIT_NUMERIC, message }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<squeezed_core::Error> for CliError {
    fn from(e: squeezed_core::Error) -> Self {
        if e.is_usage() {
            Self::usage(e.to_string())
        } else {
            Self::numeric(e.to_string())
        }
    }
}
