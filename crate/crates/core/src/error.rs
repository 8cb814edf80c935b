use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} outside the open unit interval")]
    Domain { value: f64 },

    #[error("matrix is not positive definite: [[{xx}, {xy}], [{xy}, {yy}]]")]
    NotPositiveDefinite { xx: f64, xy: f64, yy: f64 },

    #[error("all log-weights are -inf")]
    DegenerateWeights,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value for {param} at iteration {iteration}")]
    NonFinite { iteration: usize, param: String },

    #[error("{path}: row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
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

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
