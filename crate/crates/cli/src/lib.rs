//! Simulation harness around `jdsim-core`: scenario configuration, the
//! Monte-Carlo BER loop, CSV/manifest emission, exact binomial confidence
//! intervals, and the self-test suite backing the `selftest` subcommand.

pub mod config_file;
pub mod output;
pub mod scenario;
pub mod selftest;
pub mod stats;

use std::fmt;

/// Harness-level failure, split by exit code: configuration problems exit
/// with 1, numeric failures inside the detectors with 2.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<jdsim_core::Error> for CliError {
    fn from(e: jdsim_core::Error) -> Self {
        use jdsim_core::Error as E;
        match e {
            E::InvalidConfig(_) | E::InvalidInput(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
