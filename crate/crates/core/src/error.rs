use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library and the command-line front-end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid index: {0}")]
    Index(String),

    #[error("argument outside the operator domain: {0}")]
    Domain(String),

    #[error("incompatible grids: {0}")]
    Grid(String),

    #[error("accuracy requirement not met: {0}")]
    Accuracy(String),

    #[error("field is not transverse: divergence residual {residual:.3e} exceeds {threshold:.3e}")]
    Transversality { residual: f64, threshold: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("could not parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
