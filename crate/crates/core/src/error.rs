use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {n}: must be at least {min}")]
    InvalidDimension { n: usize, min: usize },

    #[error("dimension {n} unsupported for {kind}: {reason}")]
    UnsupportedDimension {
        kind: &'static str,
        n: usize,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{what} = {value} is not divisible by {divisor}")]
    Divisibility {
        what: &'static str,
        value: usize,
        divisor: usize,
    },

    #[error("sensor count {count} too small: need at least {min}")]
    CountTooSmall { count: usize, min: usize },

    #[error("joint near-isometry Gram average is singular (min eigenvalue {min_eigenvalue:e})")]
    SingularGram { min_eigenvalue: f64 },

    #[error("operation requires {expected} profile structure")]
    Structure { expected: &'static str },

    #[error("combinatorial blowup: C({n}, {s}) = {count} subsets exceeds the limit of {limit}")]
    CombinatorialBlowup {
        n: usize,
        s: usize,
        count: u128,
        limit: u128,
    },

    #[error("sensor {sensor} has no measurement rows")]
    EmptySensor { sensor: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed ensemble container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
