use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record in {path} at byte {offset} (after {docs} documents): {message}")]
    Malformed {
        path: PathBuf,
        offset: u64,
        docs: usize,
        message: String,
    },

    #[error("cannot build an index from zero documents")]
    EmptyCorpus,

    #[error("index format error: {0}")]
    Format(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
