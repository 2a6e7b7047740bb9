use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("suite schema version {0} is not supported (expected 1)")]
    Schema(u32),
    #[error("scenario {index} ({name}): field `{field}`: {message}")]
    Field {
        index: usize,
        name: String,
        field: &'static str,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] bbl_core::Error),
    #[error("unknown scenario kind `{0}`")]
    UnknownKind(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
