use thiserror::Error;

/// Errors raised by the arithmetic and numeric kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid modulus {0}: expected an odd prime")]
    InvalidModulus(u64),

    #[error("p = {0} is not congruent to 2 mod 3")]
    UnsupportedCongruence(u64),

    #[error("zero element has no cube class")]
    ZeroElement,

    #[error("Weil bound violated at p = {p}, s = {s}: |c(s)|/sqrt(p) = {ratio}")]
    WeilViolation { p: u64, s: u64, ratio: f64 },

    #[error("operation requires a table of kind {expected}")]
    WrongKind { expected: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("no finite bound: {0}")]
    NoBound(String),

    #[error("truncation N = {truncation} leaves tail bound {tail:e} above 1e-8")]
    InsufficientTruncation { truncation: usize, tail: f64 },

    #[error("structural check failed: {0}")]
    Structural(String),

    #[error("prime {ell} skipped: {reason}")]
    SkippedPrime { ell: u64, reason: &'static str },

    #[error("scan incomplete: {} primes unprocessed", unprocessed.len())]
    PartialScan { unprocessed: Vec<u64> },

    #[error("I/O error: {0}")]
    Io(String),
}

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

pub type Result<T> = std::result::Result<T, Error>;
