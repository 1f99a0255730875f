use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("malformed channel: {0}")]
    MalformedChannel(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The affine part of the map at the earlier time cannot be inverted
    /// reliably.
    #[error("non-invertible map at t = {time}: condition number {condition:e}")]
    NonInvertible { time: f64, condition: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds target {target:e}")]
    Convergence { estimate: f64, target: f64 },

    #[error("invalid input: {0}")]
    Input(String),
}
