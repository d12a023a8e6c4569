use thiserror::Error;

/// Failures reported by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge within {limit} iterations")]
    Convergence { what: &'static str, limit: usize },

    #[error("range error: {0}")]
    Range(String),

    #[error("delay too large: measured contraction ratio {ratio:.6} is not below 1")]
    DelayTooLarge { ratio: f64 },

    #[error("characteristic left the admissible interval at position {position:.6e}")]
    CharacteristicExit { position: f64 },

    #[error("history buffer underrun: requested t = {requested:.6e}, oldest stored t = {oldest:.6e}")]
    BufferUnderrun { requested: f64, oldest: f64 },

    #[error("step size too large at t = {t:.6e}: step-doubling discrepancy {discrepancy:.3e}")]
    StepSize { t: f64, discrepancy: f64 },

    #[error("radius diverged to {radius:.6e} at t = {t:.6e}")]
    Divergence { t: f64, radius: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
