use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("sum mismatch: {partition} sums to {sum} ≠ {degree}")]
    SumMismatch { partition: String, sum: u64, degree: u64 },
    #[error("parts must be positive integers")]
    NonPositivePart,
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("partition has no parts")]
    EmptyPartition,
    #[error("{divisor} does not divide every part of {partition}")]
    NotDivisible { partition: String, divisor: u64 },
    #[error("cannot split {partition} into {groups} partitions of {size}")]
    BadSplit { partition: String, groups: u64, size: u64 },
    #[error("not a permutation: {0}")]
    NotPermutation(String),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("Riemann-Hurwitz defect is {0}, expected 0")]
    RhDefect(i64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inconsistent reduction step: {0}")]
    InconsistentStep(String),
}
