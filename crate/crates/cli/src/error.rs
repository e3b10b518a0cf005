use thiserror::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Precision(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Precision(_) => 3,
            CliError::Io(_) => 4,
            CliError::Invariant(_) => 5,
        }
    }
}

impl From<splitlab::Error> for CliError {
    fn from(e: splitlab::Error) -> Self {
        use splitlab::Error as E;
        let msg = e.to_string();
        match e {
            E::PrecisionFloor { .. } | E::SpacingUnreachable { .. } => CliError::Precision(msg),
            E::NonHyperbolic => CliError::Invariant(msg),
            E::Domain(_) | E::Degenerate(_) | E::Parameter(_) | E::PrecisionMismatch { .. } => {
                CliError::Validation(msg)
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
