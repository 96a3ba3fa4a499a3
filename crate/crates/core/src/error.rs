use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("digit run {0:?} exceeds 99999999")]
    NumeralOverflow(String),

    #[error("illegal BMES transition {from}->{to} at position {position}")]
    Scheme { position: usize, from: char, to: char },

    #[error("sentence {id}: {reason}")]
    Pairing { id: String, reason: String },

    #[error("lattice length {0} exceeds the enumeration limit of 20")]
    EnumerationLimit(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("invalid model file: {0}")]
    Model(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Internal,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::EnumerationLimit(_) => ErrorKind::Usage,
            Error::Io { .. }
            | Error::Format { .. }
            | Error::NumeralOverflow(_)
            | Error::Scheme { .. }
            | Error::Pairing { .. }
            | Error::ModelVersion { .. }
            | Error::Model(_)
            | Error::Json(_) => ErrorKind::Data,
            Error::IndexOutOfRange { .. } => ErrorKind::Internal,
        }
    }
}
