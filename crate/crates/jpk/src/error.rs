use std::io;

/// Failures of a command, each tied to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    CapViolation(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 usage, 3 numeric failure, 4 estimate-cap violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::CapViolation(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<jpk_core::Error> for CliError {
    fn from(e: jpk_core::Error) -> Self {
        use jpk_core::Error as E;
        match e {
            E::NodeConvergence { .. } | E::Truncation { .. } | E::SlowConvergence { .. } | E::Quadrature { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("malformed JSON: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(format!("malformed CSV: {e}"))
    }
}
