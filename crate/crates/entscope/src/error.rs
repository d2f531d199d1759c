use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Invalid configuration or flags.
    #[error("config error: {0}")]
    Config(String),
    /// A computation failed or a validation check did not pass.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl AppError {
    pub fn numerical(err: impl std::fmt::Display) -> Self {
        Self::Numerical(err.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Config(_) => ExitCode::from(2),
            Self::Numerical(_) => ExitCode::from(3),
            Self::Io(_) => ExitCode::from(1),
        }
    }
}
