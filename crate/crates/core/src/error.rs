use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid exponent {0}: must be >= 1 or infinity")]
    InvalidExponent(f64),

    #[error("invalid weight at index {index}: {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid smoother specification: {0}")]
    InvalidSpec(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("point {point:?} lies outside the domain of {function}")]
    OutsideDomain { function: String, point: Vec<f64> },

    #[error("invalid replicate count {0}: need at least 2")]
    InvalidReplicates(usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
