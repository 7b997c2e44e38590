use atslab_core::model::ValidationReport;
use atslab_core::AtsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Inadmissible(ValidationReport),

    #[error("validation failed: {0}")]
    ValidationFailed(String),

    #[error(transparent)]
    Compute(#[from] AtsError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status: 1 config or runtime error, 2 inadmissible
    /// parameters, 3 failed validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Inadmissible(_) => 2,
            CliError::ValidationFailed(_) => 3,
            CliError::Config(_) | CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}
