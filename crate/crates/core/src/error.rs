use thiserror::Error;

/// Errors raised by the library. Decoding failure and session abandonment are
/// ordinary outcomes and are reported through status values, not here.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dimension {0} not supported (expected 1, 2, 4 or 8)")]
    UnsupportedDimension(usize),

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("degree distribution selector {0} out of range 1..=4")]
    UnknownDistribution(usize),

    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),

    #[error("SNR {snr_db:.2} dB outside the supported range [{min_db}, {max_db}] dB")]
    UnsupportedSnr { snr_db: f64, min_db: f64, max_db: f64 },

    #[error("non-physical covariance matrix: symplectic eigenvalue {0} < 1")]
    NonPhysical(f64),

    #[error("precode construction failed: {0}")]
    Precode(String),

    #[error("data exhausted: {needed} samples needed, {available} available")]
    DataExhausted { needed: usize, available: usize },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("malformed transcript: {0}")]
    Transcript(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
