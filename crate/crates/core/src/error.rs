use thiserror::Error;

/// Errors produced by the optimizer, problem catalog and experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates its documented range.
    #[error("{0}")]
    InvalidConfig(String),

    /// An argument to a numerical routine is outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The swarm produced no finite fitness value to anchor the global best.
    #[error("non-finite global best at iteration {iteration}: {detail}")]
    NonFinite { iteration: usize, detail: String },

    /// Statistic is undefined for the given sample (e.g. zero variance).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Reading or writing an artifact failed.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
