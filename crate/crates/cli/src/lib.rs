//! Configuration loading, experiment dispatch and result output for the
//! `seqfisher` command.

pub mod config;
pub mod emit;
pub mod run;

pub use config::{load_config, parse_config, ExperimentKind, OutputFormat, RunConfig};
pub use emit::{emit, render, to_csv, to_json};
pub use run::{run, Payload, ResultEnvelope, CODE_VERSION};

use seqfisher_core::Error as CoreError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Wraps a library error with the experiment it came from.
    pub fn from_core(context: &str, e: CoreError) -> Self {
        let msg = format!("{context}: {e}");
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::Precondition(_)
            | CoreError::Unsupported(_)
            | CoreError::Dimension(_)
            | CoreError::OutOfRange(_) => CliError::Config(msg),
            _ => CliError::Numerical(msg),
        }
    }
}
