use fractalis_core::Error;

/// Failure of a command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed configuration (exit 2).
    #[error("{0}")]
    Usage(String),
    /// A hypothesis or check failed, or a point was rejected (exit 1).
    #[error("{0}")]
    Analytic(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::Usage(message.into())
    }

    /// Core errors raised while building the model from configuration.
    pub fn config(err: Error) -> Self {
        Self::Usage(err.to_string())
    }

    pub fn analytic(err: Error) -> Self {
        Self::Analytic(err.to_string())
    }

    pub fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Analytic(_) => 1,
            Self::Io(_) => 2,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        Self::Usage(format!("csv output: {err}"))
    }
}
