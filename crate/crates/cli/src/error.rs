use thiserror::Error;

/// Failure classes with their process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("physics preflight failed: {0}")]
    Preflight(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Preflight(_) => 3,
            CliError::Contract(_) => 4,
            CliError::Numerical(_) => 5,
        }
    }
}

impl From<adiabat::Error> for CliError {
    fn from(e: adiabat::Error) -> Self {
        use adiabat::Error as E;
        match e {
            E::Gapless { .. } | E::FilterGap { .. } => CliError::Preflight(e.to_string()),
            E::Domain(_) | E::InvalidParameter(_) | E::DerivativeOrder { .. } => CliError::Config(e.to_string()),
            E::Accuracy(_) | E::Singular { .. } | E::NotHermitian { .. } | E::DimensionMismatch { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
