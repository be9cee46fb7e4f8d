use thiserror::Error;

/// Errors raised by model construction, solvers and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("grid mismatch: expected {expected} scores, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("{what} = {value} is outside its domain")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("curve is not concave (slope rises by {rise:e} at x = {at})")]
    NotConcave { at: f64, rise: f64 },
}

impl Error {
    /// True for errors caused by a well-formed instance that does not meet
    /// a solver or analysis precondition (as opposed to malformed input).
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::Precondition(_) | Error::Hypothesis(_) | Error::NotConcave { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
