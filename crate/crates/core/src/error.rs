use thiserror::Error;

/// Errors produced by the numeric routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error in {context}: {message}")]
    Domain { context: &'static str, message: String },

    /// A bracketing root search found equal signs at both endpoints. This
    /// indicates a broken special-function build rather than bad input.
    #[error("bracket failure on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("quadrature did not converge: {context} (refinement changed result by {delta:e}, tolerance {tol:e})")]
    QuadratureNonConvergence { context: &'static str, delta: f64, tol: f64 },

    #[error("profile is not strictly positive (min over dense grid = {min:e})")]
    NonPositiveProfile { min: f64 },

    #[error("insufficient samples: got {got}, need at least {need} for truncation order {order}")]
    InsufficientSamples { got: usize, need: usize, order: usize },

    #[error("Newton iteration failed to converge after {iters} iterations (residual {residual:e})")]
    NewtonNonConvergence { iters: usize, residual: f64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { context, message: message.into() }
    }
}
