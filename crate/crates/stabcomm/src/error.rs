use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not a prime")]
    NotPrime(u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subspace is not contained in the given superspace")]
    NotContained,
    #[error("requested dimension {requested} exceeds the cap of {cap}")]
    CapExceeded { requested: u128, cap: u128 },
    #[error("parameters outside the supported envelope: {0}")]
    Infeasible(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("operator is not a Clifford unitary: {0}")]
    NotClifford(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
