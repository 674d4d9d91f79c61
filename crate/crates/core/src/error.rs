use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("manifest row {row}: {message}")]
    Manifest { row: usize, message: String },

    #[error("{path}:{line}: {message}")]
    Lexicon {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("empty document")]
    EmptyDocument,

    #[error("zero variance")]
    ZeroVariance,

    #[error("collinear inputs")]
    Collinear,

    #[error("identical variable")]
    IdenticalVariable,

    #[error("missing indicators: {}", .0.join(", "))]
    MissingIndicators(Vec<String>),

    #[error("unknown document: {0}")]
    UnknownDocument(String),

    #[error("unknown variable: {0}")]
    UnknownVariable(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("refusing to overwrite {0} (use --force)")]
    WouldOverwrite(PathBuf),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Wraps the error with a short description of the stage that failed.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True when the root cause is an invalid configuration.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } => true,
            Error::Context { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
