use thiserror::Error;

/// Failures of the command-line driver, each with its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed file: {0}")]
    Format(String),
}

impl CliError {
    /// 2 for configuration, 3 for numerical failure, 4 for verification
    /// failure, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Io(_) | CliError::Format(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<snake_core::Error> for CliError {
    fn from(e: snake_core::Error) -> Self {
        use snake_core::Error as E;
        match e {
            E::NonFiniteState { .. } | E::NonFiniteControl { .. } | E::MeshTooCoarse { .. } | E::LogSingular { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}
