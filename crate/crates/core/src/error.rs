use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An observation symbol or state index falls outside `1..=n`.
    #[error("symbol {symbol} at position {position} is outside 1..={n_states}")]
    Range {
        symbol: usize,
        position: usize,
        n_states: usize,
    },

    #[error("invalid usage: {0}")]
    Usage(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    /// The observations have zero probability under the model.
    #[error("observation sequence has zero likelihood under the model")]
    ZeroLikelihood,

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
