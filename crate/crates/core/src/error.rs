use thiserror::Error;

/// Errors shared by every module in this crate.
///
/// The two broad families are *domain* errors (the input is outside the set an
/// operation is defined on, independent of precision) and *precision* errors
/// (the answer exists but the supplied digit window cannot distinguish it).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("zero input not allowed: {0}")]
    ZeroInput(&'static str),

    #[error("division by exact zero")]
    DivisionByZero,

    #[error("operands use different primes: {left} vs {right}")]
    MismatchedPrime { left: u64, right: u64 },

    /// All significant digits cancelled; the result is indistinguishable from
    /// zero inside the known window.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// An iterative computation ran out of digits at a specific step.
    #[error("insufficient precision at index {index}: {detail}")]
    InsufficientPrecision { index: usize, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no square root: {0}")]
    NoRoot(String),

    #[error("quotient list is empty")]
    EmptyQuotients,

    #[error("sequence too short: need at least {needed} terms, got {got}")]
    SequenceTooShort { needed: usize, got: usize },

    #[error("no witness index found up to n = {n_cap}")]
    WitnessNotFound { n_cap: u64 },

    /// The witness comparison could not be decided within the fallback's
    /// working bounds. Practically unreachable for sane inputs.
    #[error("comparison undecided: {0}")]
    Undecidable(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse classification used by callers that map errors onto exit codes
    /// or wire formats.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::PrecisionExhausted(_) | Error::InsufficientPrecision { .. } => {
                ErrorKind::Precision
            }
            Error::Invalid(_) => ErrorKind::Input,
            Error::WitnessNotFound { .. } => ErrorKind::NotFound,
            Error::Undecidable(_) => ErrorKind::Internal,
            _ => ErrorKind::Domain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Precision,
    Input,
    NotFound,
    Internal,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Domain => "domain",
            ErrorKind::Precision => "precision",
            ErrorKind::Input => "input",
            ErrorKind::NotFound => "not-found",
            ErrorKind::Internal => "internal",
        }
    }
}
