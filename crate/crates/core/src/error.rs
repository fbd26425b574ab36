use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible hull: {0}")]
    Infeasible(String),

    #[error("sampling failed after {attempts} attempts")]
    SamplingFailure { attempts: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("model file: bad magic bytes")]
    BadMagic,

    #[error("model file: unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("model file: checksum mismatch")]
    Checksum,

    #[error("dataset integrity: {0}")]
    Integrity(String),

    #[error("optimizer: {0}")]
    Optimizer(String),

    #[error("training: {0}")]
    Training(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Domain(_) => "domain",
            Error::Infeasible(_) => "infeasible",
            Error::SamplingFailure { .. } => "sampling-failure",
            Error::Parse { .. } => "parse",
            Error::BadMagic => "bad-magic",
            Error::UnsupportedVersion(_) => "unsupported-version",
            Error::Checksum => "checksum",
            Error::Integrity(_) => "integrity",
            Error::Optimizer(_) => "optimizer",
            Error::Training(_) => "training",
            Error::Io { .. } => "io",
        }
    }
}
