//! Command implementations behind the `qtransduce` binary.
//!
//! Every command maps a validated [`RunConfig`] to the exact text it emits,
//! so the binary only has to route bytes and pick an exit code.

pub mod commands;
pub mod config;
mod json;
pub mod presets;

pub use commands::{run, Command, Output};
pub use config::{Overrides, RunConfig};
pub use presets::{run_preset, Preset};

use qtransduce::Error;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 1 for bad input or unwritable output, 2 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Numerical(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SingularMatrix { .. }
            | Error::SingularAtFrequency { .. }
            | Error::NonConvergent { .. }
            | Error::Degenerate => Self::Numerical(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
