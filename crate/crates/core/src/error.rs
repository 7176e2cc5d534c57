use thiserror::Error;

/// Failures surfaced by the closed-form and oracle paths.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("truncation did not converge: {0}")]
    ConvergenceFailed(String),

    #[error("state has vanishing norm (norm² = {0:e})")]
    ZeroNorm(f64),

    #[error("vanishing postselection probability {survival_prob:e} at omega_m t = {t}")]
    VanishingPostselection { t: f64, survival_prob: f64 },

    #[error("outside the expansion domain: {0}")]
    DomainViolation(String),

    #[error("integration step rejected: trace drift {drift:e}")]
    StepRejected { drift: f64 },

    #[error("density matrix lost positivity at omega_m t = {t}")]
    PositivityLost { t: f64 },

    #[error("closed form only applies to |alpha|=1/2, beta=2pi, r=2, theta=pi")]
    ClosedFormInapplicable,

    #[error("zero denominator: eps and eta both vanish")]
    ZeroDenominator,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors caused by the numerics (truncation, convergence,
    /// integration) rather than by bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::TruncationTooSmall(_)
                | Error::ConvergenceFailed(_)
                | Error::ZeroNorm(_)
                | Error::VanishingPostselection { .. }
                | Error::StepRejected { .. }
                | Error::PositivityLost { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
