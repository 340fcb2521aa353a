use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{value} lies outside the defined range [{lo}, {hi}) of {set}")]
    OutOfRange {
        set: String,
        value: BigInt,
        lo: BigInt,
        hi: BigInt,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rank {r} exceeds the cap of {cap}")]
    RankTooLarge { r: usize, cap: usize },
    #[error("window of size {size} exceeds the cap of {cap}")]
    WindowTooLarge { size: u64, cap: u64 },
    #[error("fractional part of {what} is within {band} of an interval boundary; refusing to guess")]
    BoundaryAmbiguity { what: String, band: String },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("norm form {0} has no ring structure attached")]
    NoRingStructure(String),
    #[error("{0} is not enumerable")]
    NotEnumerable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
