use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid partition labels: {0}")]
    InvalidLabels(String),
    #[error("inconsistent partition: {0}")]
    InconsistentPartition(String),
    #[error("augmented system of subdomain {subdomain} is singular")]
    LocalSingular { subdomain: usize },
    #[error("preconditioner construction failed: {0}")]
    PreconditionerFailure(String),
    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },
    #[error("diagonal block {block} is singular")]
    SingularBlock { block: usize },
    #[error("inner block of subdomain {subdomain} is singular")]
    SingularInner { subdomain: usize },
    #[error("W + S is singular")]
    SingularSum,
    #[error("sum of interface Schur complements is singular")]
    SingularSchurSum,
}

pub type Result<T> = core::result::Result<T, Error>;
