use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-contract input.
    #[error("invalid input: {0}")]
    Input(String),

    /// A well-formed input outside the domain of the operation, e.g. a
    /// density evaluated on a face where it is infinite.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested size exceeds what the dense routines accept.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The input carries no information for the operation (constant
    /// function, zero variance).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations (active block size {active})")]
    NoConvergence {
        index: usize,
        iterations: usize,
        active: usize,
    },

    #[error("non-finite value produced: {message} (state {state:?})")]
    NonFinite { message: String, state: Vec<f64> },

    /// A computed quantity violates a property it must have (e.g. an
    /// imaginary eigenvalue of an operator that is self-adjoint).
    #[error("consistency check failed: {0}")]
    Consistency(String),

    /// The estimator could not produce a usable result from the data.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
