use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("system file: {0}")]
    Document(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] nonoether_core::CoreError),
}

pub type Result<T> = std::result::Result<T, CliError>;
