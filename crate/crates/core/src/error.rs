use thiserror::Error;

/// Errors raised by the laboratory.
///
/// The CLI maps `Config`/`Validation`/`Constraint`/`Coverage` to exit code 2 and
/// `NumericalInstability` to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical instability in field {field} at node {node}: value {value:e} (t = {t})")]
    NumericalInstability {
        field: &'static str,
        node: usize,
        value: f64,
        t: f64,
    },

    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
