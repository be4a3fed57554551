use thiserror::Error;

/// Errors raised by the arithmetic layers and the two L-function pipelines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("polynomial is not irreducible over F_{p}")]
    NotIrreducible { p: u64 },
    #[error("p^M = {p}^{precision} does not fit the word-sized modulus")]
    PrecisionTooLarge { p: u64, precision: u32 },
    #[error("mismatched rings: {0}")]
    RingMismatch(String),
    #[error("degree {sub} does not divide ring degree {degree}")]
    DegreeNotDivisible { sub: usize, degree: usize },
    #[error("not a basis: Gram matrix of traces is singular mod p")]
    NotABasis,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("Teichmuller iteration did not stabilise within {0} steps")]
    TeichmullerDiverged(u32),
    #[error("non-positive valuation for specialization point {index}")]
    NonPositiveValuation { index: usize },
    #[error("coefficient at {monomial:?} is not in Z_p")]
    NotZp { monomial: Vec<u32> },
    #[error("degree truncation {have} too small; need at least {need}")]
    DegreeTooSmall { have: usize, need: usize },
    #[error("expansion coefficient e_{0} missing from the list")]
    InsufficientCoefficients(usize),
    #[error("matrix dimension {dim} exceeds limit {limit}; K = ceil(d*D/(a*(p-1))) + kmax + 1")]
    SizeGuard { dim: usize, limit: usize },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("basis element {0} is not a Teichmuller lift")]
    NonTeichmullerBasis(usize),
    #[error("non-integral coefficient at degree {degree}")]
    NonIntegral { degree: usize },
    #[error("nonzero coefficient at degree {degree} beyond the expected degree {expected}")]
    DegreeExceeded { degree: usize, expected: usize },
    #[error("division by the trivial-zero factor is not exact")]
    InexactDivision,
    #[error("minor is not a power series in the linear form: witness monomial {monomial:?}")]
    NotInLinearForm { monomial: Vec<u32> },
    #[error("character conductor {m} but no coordinate is a unit mod p")]
    BadConductor { m: u32 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
