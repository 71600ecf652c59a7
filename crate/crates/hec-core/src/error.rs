//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by trace ingestion, configuration, solving, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed content in a data file, with the 1-based line number.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// Timestamps in an input file are not strictly increasing.
    #[error("{path}:{line}: timestamps must be strictly increasing")]
    Unsorted { path: PathBuf, line: usize },

    /// A parameter or file violates a structural constraint.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Two configured parameters conflict with each other.
    #[error("invalid configuration: {0}")]
    Validation(String),

    /// An operation was called outside its mathematical domain.
    #[error("{0}")]
    Domain(String),

    /// Not enough data points to run the requested operation.
    #[error("insufficient data: need at least {required} points, have {actual}")]
    InsufficientData { required: usize, actual: usize },

    /// An allocation references an instance type absent from the catalog.
    #[error("unknown instance type {0:?}")]
    UnknownInstanceType(String),

    /// A window position falls outside the series.
    #[error("window at index {index} out of range for series of {len} points")]
    Range { index: usize, len: usize },

    /// The exhaustive reference solver would enumerate too many candidates.
    #[error("oracle search space too large: more than {limit} candidates")]
    OracleScope { limit: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: 2 for usage/validation problems,
    /// 3 for errors found in the data while processing it.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Validation(_) | Error::InsufficientData { .. } => 2,
            Error::Json { .. } => 2,
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
