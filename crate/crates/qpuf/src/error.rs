use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, msg: impl ToString) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            msg: msg.to_string(),
        }
    }

    /// Process exit status: 2 configuration, 4 I/O or file format.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } | Error::Format { .. } => 4,
        }
    }
}

/// Core errors reached through a valid configuration are parameter
/// problems.
pub(crate) fn param<E: ToString>(e: E) -> Error {
    Error::Config(e.to_string())
}
