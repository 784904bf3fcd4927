use thiserror::Error;

/// Errors produced by the laboratory.
///
/// Variants are split into validation problems (bad input, detected before
/// any compute) and numerical failures (detected while computing).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("threshold assumption J0 <= J_eps violated (J0 = {j0}, J_eps = {jeps}); decrease eps or K, or increase k")]
    ThresholdInversion { j0: i32, jeps: i32 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular multiplier applied to a field with nonzero mean ({re:e} + {im:e}i)")]
    NonzeroMean { re: f64, im: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("regime mismatch: {0}")]
    Regime(String),

    #[error("density positivity violated: 1 + a = {value:e} at sample {index}")]
    DensityPositivity { index: usize, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("quadrature underflow at t = {t:e}: all weighted samples vanished")]
    Underflow { t: f64 },

    #[error("unresolved: {0}")]
    Unresolved(String),
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the input rather than by the computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::ThresholdInversion { .. }
                | Error::Dimension(_)
                | Error::NonzeroMean { .. }
                | Error::Precondition(_)
                | Error::Regime(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
