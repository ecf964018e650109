use thiserror::Error;

/// Errors raised by the permutation, twins and finder routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwinsError {
    #[error("empty sequence")]
    EmptySequence,
    #[error("duplicate value {0}")]
    DuplicateValue(i64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index {index} out of range for host of length {len}")]
    InvalidIndex { index: usize, len: usize },
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("multiplicity mismatch: {left} vs {right}")]
    MultiplicityMismatch { left: usize, right: usize },
    #[error("certificates cannot be concatenated")]
    ConcatenationInvalid,
    #[error("multiplicity must be at least 2, got {0}")]
    InvalidMultiplicity(usize),
    #[error("search budget exceeded (best lower bound found: {lower_bound:?})")]
    BudgetExceeded { lower_bound: Option<usize> },
    #[error("inputs are not permutations of a common set")]
    SetMismatch,
    #[error("expected {expected} permutations, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("common sub-permutation of length {found} is below the guaranteed {bound} (m = {m}, R = {big_r})")]
    LemmaViolation { found: usize, bound: usize, m: usize, big_r: usize },
    #[error("no block of width at most {cap} in this round")]
    NoNarrowBlocks { cap: usize },
    #[error("construction bug: {0}")]
    ConstructionBug(String),
    #[error("block size {a} is smaller than multiplicity {r}")]
    BlockTooSmall { a: usize, r: usize },
    #[error("block size {a} exceeds host length {n}")]
    BlockTooLarge { a: usize, n: usize },
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("length {k} infeasible: r*k = {rk} exceeds n = {n}")]
    InfeasibleLength { n: usize, k: usize, rk: usize },
    #[error("monotone subsequence of length {len} is shorter than r = {r}")]
    TooShort { len: usize, r: usize },
}

pub type Result<T> = std::result::Result<T, TwinsError>;
