use thiserror::Error;

/// Errors produced by the fitting pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaghettiError {
    /// The data cannot support the requested fit (too few points, repeated x, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A Cholesky pivot was not strictly positive.
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Every candidate kernel width failed to produce a usable solve.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl SpaghettiError {
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Self::DegenerateInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::InvalidConfig(msg.into())
    }

    /// True for errors caused by the caller's data or settings rather than
    /// by floating point trouble inside a fit.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Self::DegenerateInput(_) | Self::InvalidConfig(_))
    }
}

pub type Result<T, E = SpaghettiError> = std::result::Result<T, E>;
