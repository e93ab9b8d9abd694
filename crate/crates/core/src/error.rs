use thiserror::Error;

/// Errors raised by the quadrature library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    /// A point or sub-interval lies outside the domain of a function.
    #[error("{value} is outside the domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    /// An input failed validation (bad interval, negative norm, inverted band, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// The operation is not defined for the given arguments (e.g. odd n where even is required).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The integrand cannot supply the requested derivative order.
    #[error("derivative of order {requested} requested but integrand supports at most {available}")]
    Capability { requested: usize, available: usize },

    /// The reference oracle did not reach its tolerance before the panel cap.
    #[error("reference integral did not converge to {tol:e} within {panels} panels (last change {last_change:e})")]
    Convergence {
        tol: f64,
        panels: usize,
        last_change: f64,
    },
}

impl QuadError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        QuadError::Validation(msg.into())
    }

    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        QuadError::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, QuadError>;
