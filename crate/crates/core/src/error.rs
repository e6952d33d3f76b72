use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("numerical failure at step {step}: {reason}")]
    Numerical { step: usize, reason: String },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0} used before fit")]
    NotFitted(&'static str),

    #[error("{path}:{line}: parse error: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: format error in {field}: {reason}")]
    Format {
        path: PathBuf,
        field: String,
        reason: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("realization {realization}: {source}")]
    Realization {
        realization: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// A failure recorded in a sweep row, keeping the original class.
    #[error("{message}")]
    Recorded { class: ErrorClass, message: String },
}

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Numerical { .. } => ErrorClass::Numerical,
            Error::Realization { source, .. } => source.class(),
            Error::Recorded { class, .. } => *class,
            Error::Parse { .. }
            | Error::Format { .. }
            | Error::Validation(_)
            | Error::Io { .. }
            | Error::Csv(_) => ErrorClass::Data,
            _ => ErrorClass::Config,
        }
    }
}
