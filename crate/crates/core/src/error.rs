use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which channel component a projected estimate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// Source-to-relay channel of source `k` (zero based).
    Source(usize),
    /// Relay-to-destination channel.
    Destination,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Source(k) => write!(f, "f_{}", k + 1),
            Component::Destination => write!(f, "g"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("degenerate projection for {0}: cross-correlation vector is orthogonal to the subspace")]
    DegenerateProjection(Component),

    #[error("estimator has no observations yet")]
    NoObservations,

    #[error("component count {requested} outside 1..={dimension}")]
    ComponentCount { requested: usize, dimension: usize },

    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(&'static str),

    #[error("invalid config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("numerical failure in trial {trial}, snapshot {snapshot}: {message}")]
    Numerical {
        trial: usize,
        snapshot: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            found,
        })
    }
}
