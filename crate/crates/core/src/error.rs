use std::path::PathBuf;

use thiserror::Error;

use crate::time::Timestamp;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input series does not cover the simulated span.
    #[error("{series} does not cover {missing_from} .. {missing_to}")]
    InputCoverage {
        series: String,
        missing_from: Timestamp,
        missing_to: Timestamp,
    },

    /// A dataset or configuration value breaks one of its invariants.
    #[error("{}", format_validation(.file, .line, .message))]
    Validation {
        file: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },

    /// A metric is mathematically undefined for the given data (e.g. no energy charged).
    #[error("{0} is undefined for this data")]
    Undefined(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("experiment {id} failed: {source}")]
    Experiment {
        id: String,
        #[source]
        source: Box<Error>,
    },
}

fn format_validation(file: &Option<PathBuf>, line: &Option<usize>, message: &str) -> String {
    match (file, line) {
        (Some(f), Some(l)) => format!("{}:{}: {}", f.display(), l, message),
        (Some(f), None) => format!("{}: {}", f.display(), message),
        (None, Some(l)) => format!("line {}: {}", l, message),
        (None, None) => message.to_string(),
    }
}

impl Error {
    pub fn invalid(message: impl Into<String>) -> Self {
        Error::Validation {
            file: None,
            line: None,
            message: message.into(),
        }
    }

    pub fn invalid_at(
        file: impl Into<PathBuf>,
        line: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        Error::Validation {
            file: Some(file.into()),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a file name to a validation error that was raised without one.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Validation {
                file: None,
                line,
                message,
            } => Error::Validation {
                file: Some(path.into()),
                line,
                message,
            },
            other => other,
        }
    }

    /// True for errors caused by bad input rather than by a failing run.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation { .. } | Error::InputCoverage { .. } | Error::Io { .. } => true,
            Error::Experiment { source, .. } => source.is_validation(),
            Error::Undefined(_) => false,
        }
    }
}
