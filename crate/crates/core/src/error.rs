use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by model construction, configuration loading and the
/// statistics routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on shapes or values was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A configuration record failed validation. `field` is a dotted path
    /// into the offending document.
    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },

    #[error("failed to parse {}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    /// Wraps an error with the file it came from.
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
