use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] neolith::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("verdict failed: {0}")]
    Verdict(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 configuration/validation, 3 numerical failure, 4 verdict failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(neolith::Error::NumericalInstability { .. }) => 3,
            CliError::Core(_) | CliError::Config(_) => 2,
            CliError::Verdict(_) => 4,
        }
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
