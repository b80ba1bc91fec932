use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("size budget exceeded: {what} needs {needed}, cap is {cap}")]
    SizeBudgetExceeded { what: String, needed: String, cap: u64 },
    #[error("search budget exceeded: {needed} subspaces to visit, budget is {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{l} does not divide {m}")]
    NotADivisor { l: u32, m: u32 },
    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),
    #[error("vectors are linearly dependent")]
    DependentBasis,
    #[error("basis expansion failed: {0}")]
    BasisExpansionFailure(String),
    #[error("bilinear form restricted to the subspace is degenerate")]
    DegenerateRestriction,
    #[error("not contained: {0}")]
    NotContained(String),
    #[error("system does not span the ambient space")]
    DegenerateSystem,
    #[error("transformed coefficient B_{0} is not an integer")]
    NonIntegerSolution(usize),
    #[error("transformed coefficient B_{0} is negative")]
    NegativeCoefficient(usize),
    #[error("parameter violation: {0}")]
    ParameterViolation(String),
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("not maximum scattered: {0}")]
    NotMaximumScattered(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
}

pub type Result<T> = std::result::Result<T, Error>;
