use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A caller broke an operation's contract (gain bound, select/feed order, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed trace, topology, or config input.
    #[error("input error in {path}: {message}")]
    Input { path: PathBuf, message: String },

    /// A request that would exceed a hard resource guard.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Wraps an error raised while executing a particular run.
    #[error("run {run}: {source}")]
    Run {
        run: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn input(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Input {
            path: path.into(),
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Contract(_) => "contract",
            Error::Input { .. } => "input",
            Error::Resource(_) => "resource",
            Error::Io { .. } => "io",
            Error::Run { source, .. } => source.kind(),
        }
    }
}
