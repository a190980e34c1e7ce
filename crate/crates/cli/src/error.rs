use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid JSON: {0}")]
    Parse(String),

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("invalid scenario: {0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] nielsen_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
