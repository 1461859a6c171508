use std::path::PathBuf;

use thiserror::Error;

/// Everything that stops a command before it produces a report.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("cannot parse {}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] nlmetro_core::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Self::Config {
            field: field.into(),
            message: message.to_string(),
        }
    }

    /// Every error is a usage or configuration problem; failed assertions
    /// are reported through a normal report instead.
    pub fn exit_code(&self) -> u8 {
        2
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
