use thiserror::Error;

use crate::spectral::FrobeniusForm;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the max-algebra routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyDimension,

    #[error("entry ({row}, {col}) = {value} is not a finite nonnegative number")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("weight vector entry {index} = {value} must be strictly positive and finite")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("not a permutation of 0..{n}")]
    InvalidPermutation { n: usize },

    #[error("matrix set must contain at least one member")]
    EmptySet,

    #[error("duplicate member name {0:?}")]
    DuplicateName(String),

    #[error("unknown member name {0:?}")]
    UnknownMember(String),

    #[error("Kleene star diverges: cycle mean {mu} exceeds 1")]
    Divergent { mu: f64 },

    #[error("matrix is reducible ({} communicating classes)", form.classes.len())]
    Reducible { form: Box<FrobeniusForm> },

    #[error("spectral radius is zero; no eigenvector with positive eigenvalue")]
    DegenerateSpectrum,

    #[error("critical cycle is not unique; cycle mean is not differentiable here")]
    NotDifferentiable,

    #[error("critical-cycle uniqueness is undecided for dimension {n} (limit {limit})")]
    UniquenessUnknown { n: usize, limit: usize },

    #[error("enumeration needs {required} products, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("joint spectral radius is zero; nothing to certify")]
    NothingToCertify,

    #[error("internal verification failed: {0}; consider a smaller tolerance")]
    ToleranceFailure(String),

    #[error("dimension {n} exceeds the brute-force guard {limit}")]
    DimensionGuard { n: usize, limit: usize },

    #[error("no irreducible instance after {0} attempts")]
    RetryExhausted(usize),

    #[error("interpolated set at step {step} has a reducible aggregate")]
    InterpolationReducible { step: usize },

    #[error("member counts differ: {left} vs {right}")]
    MemberCountMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
