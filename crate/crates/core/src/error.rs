use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid group table: {0}")]
    InvalidTable(String),

    #[error("invalid group word: {0}")]
    InvalidWord(String),

    #[error("invalid endomorphism: {0}")]
    InvalidEndomorphism(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// A fixed point with det(I - J) = 0; the sign formula does not apply.
    #[error("degenerate data: det(I - J) = 0")]
    Degenerate,

    /// Same as [`Error::Degenerate`], naming the offending iterate.
    #[error("degenerate data: det(I - A^{iterate}) = 0")]
    DegenerateIterate { iterate: u64 },

    #[error("class set too large to enumerate ({count} classes exceeds bound {bound})")]
    ClassSetTooLarge { count: u128, bound: u128 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("class {0} lies outside the action domain")]
    ActionDomainMismatch(String),

    #[error("orbit index inconsistency: {0}")]
    OrbitIndexInconsistency(String),

    #[error("missing data for divisor {0}")]
    MissingDivisor(u64),

    #[error("divisor sets differ: {0}")]
    DivisorMismatch(String),

    #[error("group order {order} exceeds the subgroup enumeration bound {bound}")]
    OrderBoundExceeded { order: usize, bound: usize },

    #[error("traces are defined over different class sets")]
    ClassSetMismatch,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
