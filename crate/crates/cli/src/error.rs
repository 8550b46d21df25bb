use crate::config::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 validation (including unreadable input), 2 numerical,
    /// 3 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// Wraps a library error with the step that produced it.
    pub fn from_core(context: &str, e: chiral_decoherence::Error) -> Self {
        use chiral_decoherence::Error as E;
        let msg = format!("{context}: {e}");
        match e {
            E::InvalidInput(_) | E::NearResonance { .. } | E::InvalidChannel(_) | E::StepSize { .. } => {
                CliError::Validation(msg)
            }
            E::Kinematics { .. } | E::NumericalFailure { .. } => CliError::Numerical(msg),
        }
    }
}
