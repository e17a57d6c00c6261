use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Schema violation; `pointer` is a JSON pointer into the scenario file.
    #[error("scenario {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("scenario version {found} is not supported (expected {expected})")]
    Version { found: u64, expected: u64 },
    #[error("{0}")]
    Usage(String),
    /// The run finished but its result is a failure.
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] mmcert::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema { pointer: pointer.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
