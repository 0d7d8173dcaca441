use cardpath_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Io = 1,
    Validation = 2,
    Numerical = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid '{field}': {message}")]
    Validation { field: String, message: String },
    #[error("{operation}: {source}")]
    Numerical { operation: &'static str, source: CoreError },
    #[error("{operation}: {message}")]
    Check { operation: &'static str, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation { field: field.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation { .. } => ExitCode::Validation,
            CliError::Numerical { .. } | CliError::Check { .. } => ExitCode::Numerical,
            CliError::Io { .. } => ExitCode::Io,
        }
    }
}

/// Attaches the failing operation to a core error. Argument errors surface
/// as validation failures.
pub trait Context<T> {
    fn during(self, operation: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn during(self, operation: &'static str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            CoreError::InvalidArgument(_)
            | CoreError::InvalidGrid(_)
            | CoreError::InvalidLagrangian(_)
            | CoreError::InvalidDistribution(_)
            | CoreError::NonpositiveUnit(_)
            | CoreError::NegativeModulus(_)
            | CoreError::TooLarge { .. } => CliError::field(operation, e.to_string()),
            _ => CliError::Numerical { operation, source: e },
        })
    }
}
