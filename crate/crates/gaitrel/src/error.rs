//! Error type and process exit-code mapping shared by the library and the CLI.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GaitError {
    /// A precondition on an operation's input was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Filesystem or stream failure.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed text in a data file (CSV row, JSON record).
    #[error("parse error in {file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    /// Unrecognized or inconsistent file format / version.
    #[error("format error: {0}")]
    Format(String),

    /// Bad command-line usage (unknown flag value, unknown token).
    #[error("usage error: {0}")]
    Usage(String),
}

impl GaitError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        GaitError::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        GaitError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 0 success, 1 usage, 2 I/O, 3 invalid input, 4 format.
    pub fn exit_code(&self) -> i32 {
        match self {
            GaitError::Usage(_) => 1,
            GaitError::Io { .. } => 2,
            GaitError::InvalidInput(_) => 3,
            GaitError::Format(_) | GaitError::Parse { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, GaitError>;
