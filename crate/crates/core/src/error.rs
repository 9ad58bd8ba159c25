use thiserror::Error;

/// Failures surfaced by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not hermitian (‖M − M†‖ = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    /// The ground patch is not isolated: the spectral hypothesis of every
    /// adiabatic statement is violated.
    #[error("gapless spectrum: gap {gap:.3e} does not exceed {threshold:.3e}")]
    Gapless { gap: f64, threshold: f64 },

    #[error("filter gap {filter:.3e} exceeds the spectral gap {gap:.3e}")]
    FilterGap { filter: f64, gap: f64 },

    #[error("singular inverse Liouvillian: eigenvalue difference {difference:.3e} across the patch boundary")]
    Singular { difference: f64 },

    #[error("derivative order {order} exceeds the supported maximum {max}")]
    DerivativeOrder { order: usize, max: usize },

    #[error("accuracy failure: {0}")]
    Accuracy(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
