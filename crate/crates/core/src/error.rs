use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read config {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),

    /// A configuration value is out of its admissible range. `field` is the
    /// dotted path of the offending value, e.g. `platforms[1].chi`.
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// A function argument violates its precondition.
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("{flagged} of {samples} Monte Carlo samples hit the {max_rounds}-round cap")]
    RoundCapExceeded {
        flagged: u64,
        samples: u64,
        max_rounds: u64,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
