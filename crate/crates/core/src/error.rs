use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical quantity is outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-supplied argument is out of range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Malformed input text (polar files, CSV, configs).
    #[error("{source_name}:{line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },

    /// A type invariant was violated while validating configuration.
    #[error("invalid value for `{field}`: {message}")]
    Invariant { field: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("time step {dt:.3e} s violates the {limit} stability limit; use dt <= {suggested:.3e} s")]
    Cfl {
        dt: f64,
        suggested: f64,
        limit: &'static str,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invariant(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
