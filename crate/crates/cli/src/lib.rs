//! Command-line front end: configuration, commands and chart rendering.

pub mod commands;
pub mod config;
pub mod plot;

use std::fmt;

/// Failures of a command. Check failures are not errors: `verify` reports
/// them in its outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable, malformed or invalid configuration, or a missing required
    /// setting.
    Config(String),
    /// Malformed input data.
    Input(String),
    /// The engine rejected a computation.
    Engine(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Engine(m) => write!(f, "engine error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<heatkernel::Error> for CliError {
    fn from(e: heatkernel::Error) -> Self {
        CliError::Engine(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Exit code when every check passes or the command succeeds.
pub const EXIT_OK: u8 = 0;
/// Exit code when a verification check fails.
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Exit code for configuration, input and engine errors.
pub const EXIT_ERROR: u8 = 2;
