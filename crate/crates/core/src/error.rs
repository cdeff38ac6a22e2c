use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),

    #[error("extension degree {0} out of range (1..=4, and 1 over the rationals)")]
    ExtensionDegree(u32),

    #[error("field of order {0} is too large for table arithmetic")]
    FieldTooLarge(u64),

    #[error("operation requires a finite field")]
    InfiniteField,

    #[error("elements from different fields were combined")]
    MixedFields,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid grading matrix: {0}")]
    InvalidGrading(String),

    #[error("bidegree mismatch: {left:?} vs {right:?}")]
    BidegreeMismatch { left: (i64, i64), right: (i64, i64) },

    #[error("polynomials live on different gradings")]
    GradingMismatch,

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("variable {var} has weight {weight}; charts are only built for weight-1 fiber variables")]
    ChartWeight { var: String, weight: i64 },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("point lies on the excluded locus: {0}")]
    ExcludedLocus(String),

    #[error("jet order must be at least 1, got {0}")]
    JetOrder(u32),

    #[error("expansion has a nonzero linear part; not a critical point")]
    NotCritical,

    #[error("brute-force budget exceeded: {points} points > budget {budget}")]
    BudgetExceeded { points: u128, budget: u128 },

    #[error("retry limit of {0} reached while drawing a nondegenerate section")]
    RetryLimit(u32),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
