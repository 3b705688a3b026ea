use std::path::PathBuf;

use thiserror::Error;

use crate::gaussian::ModeLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown mode {0}")]
    UnknownMode(ModeLabel),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("bright-beam measurement undefined: {0}")]
    BrightBeamUndefined(String),

    #[error("mode budget exceeded: {requested} pixels requested, budget is {budget}")]
    ModeBudget { requested: usize, budget: usize },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the user's configuration or input files,
    /// as opposed to failures while running the physics.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Config { .. } | Error::Parse { .. } => true,
            Error::Scenario { source, .. } => source.is_config_error(),
            _ => false,
        }
    }

    pub fn is_io_error(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Integrity(_) => true,
            Error::Scenario { source, .. } => source.is_io_error(),
            _ => false,
        }
    }
}
