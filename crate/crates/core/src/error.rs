use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An enclosure straddles a decision boundary at the current precision.
    /// Escalation loops consume this; it only escapes through the
    /// low-level `BigReal` API.
    #[error("enclosure straddles a decision boundary at the current precision")]
    Unresolved,

    #[error("ambiguous at maximum precision ({bits} bits): {what}")]
    AmbiguousAtMaxPrecision { bits: u32, what: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{q} is not invertible modulo {p}")]
    NotInvertible { q: i64, p: u64 },

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid lattice query: {0}")]
    InvalidQuery(String),

    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("work {work} exceeds the cap of {cap}")]
    WorkCapExceeded { work: u128, cap: u128 },

    #[error("{h}·alpha is an integer")]
    IntegerMultiple { h: u64 },

    #[error("count exceeds the explicit bound at H = {h}")]
    Violation { h: u64 },

    #[error("gcd({a1}, {a2}) != 1")]
    NotCoprime { a1: u64, a2: u64 },

    #[error("a*floor(n^alpha) + b <= 0 at n = {n}")]
    SkippedSmallN { n: u64 },

    #[error("closure of J is not inside (a, sqrt(a)): {0}")]
    ClosureViolation(String),

    #[error("at n = {n}: {source}")]
    AtIndex { n: u64, source: Box<Error> },
}

impl Error {
    /// Attaches the offending index to an error, once.
    pub fn at(self, n: u64) -> Error {
        match self {
            Error::AtIndex { .. } => self,
            other => Error::AtIndex { n, source: Box::new(other) },
        }
    }

    pub fn is_ambiguity(&self) -> bool {
        match self {
            Error::AmbiguousAtMaxPrecision { .. } | Error::Unresolved => true,
            Error::AtIndex { source, .. } => source.is_ambiguity(),
            _ => false,
        }
    }

    /// The innermost error, with index wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIndex { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
