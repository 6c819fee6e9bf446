use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StableError {
    /// An argument lies outside the range where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The exponent is too close to the pole at `p = alpha`.
    #[error("pole proximity: p = {p} is within {margin:e} of alpha = {alpha}")]
    PoleProximity { p: f64, alpha: f64, margin: f64 },

    /// Quadrature gave up before reaching the requested tolerance.
    #[error(
        "quadrature did not converge: best estimate {value:e}, error estimate {error_estimate:e}"
    )]
    NonConvergence { value: f64, error_estimate: f64 },

    /// The marginal of X1 has zero scale (every atom lies on the s2 axis).
    #[error("degenerate marginal: gamma_1 = 0")]
    DegenerateMarginal,

    /// The conditional expectation is not known to exist for this measure.
    #[error("existence condition fails: {0}")]
    Existence(String),

    /// The marginal density underflowed where it is used as a divisor.
    #[error("density {0:e} underflows at the conditioning point")]
    DensityUnderflow(f64),

    #[error("input error: {0}")]
    Input(String),
}

impl StableError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        StableError::Domain(msg.into())
    }

    /// True for errors caused by numerical failure rather than invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            StableError::NonConvergence { .. } | StableError::DensityUnderflow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, StableError>;
