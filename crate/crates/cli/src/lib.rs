//! Command-line front end for `sqrbm-core`: argument parsing, config files, file formats,
//! parallel sweeps and the verification batteries.

use std::fmt;

pub mod commands;
pub mod config;
pub mod io;
pub mod sweep;
pub mod verify;

/// Failure of a subcommand, carrying its exit code class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Invalid flags, config keys or flag combinations (exit 2).
    Usage(String),
    /// Numeric or IO failure while running (exit 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    /// Validation failures of the core library are usage errors.
    pub fn usage(e: sqrbm_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn runtime(e: sqrbm_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
