use std::path::PathBuf;

use crate::pysrc::SyntaxError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid module path: {0}")]
    InvalidPath(String),
    #[error("unsupported schema version {found} (supported: {supported})")]
    Schema { found: u64, supported: u64 },
    #[error("malformed database: {0}")]
    Format(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
