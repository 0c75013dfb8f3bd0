//! Error type shared across the crate.

use thiserror::Error;

/// Errors from model validation, kernel evaluation, solving, and output.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The drive excursion never reaches the crossover flux of the requested channel.
    #[error("crossover not reached: {0}")]
    NotReached(String),

    /// The requested approximation is evaluated outside its validity regime.
    #[error("validity: {0}")]
    Validity(String),

    /// The rate graph splits into disconnected groups of states, so the
    /// stationary distribution is not unique.
    #[error("degenerate chain: disconnected state groups {groups:?}")]
    DegenerateChain { groups: Vec<Vec<usize>> },

    /// A numerical solve produced an unusable result.
    #[error("compute error: {0}")]
    Compute(String),

    /// Configuration problem; `path` is the offending key or file.
    #[error("config `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 for input problems, 2 for compute problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            _ => 2,
        }
    }

    /// Stable machine-readable variant name for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::NotReached(_) => "not-reached",
            Error::Validity(_) => "validity",
            Error::DegenerateChain { .. } => "degenerate-chain",
            Error::Compute(_) => "compute",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}
