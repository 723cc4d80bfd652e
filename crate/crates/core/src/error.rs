use thiserror::Error;

use crate::lattice::Rational;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gram matrix is empty")]
    EmptyMatrix,
    #[error("gram matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("gram matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("gram matrix is not positive definite: leading minor {index} is {minor}")]
    NotPositiveDefinite { index: usize, minor: Rational },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("scale factor must be positive")]
    NonPositiveScale,
    #[error("squared radius must be nonnegative")]
    RadiusNegative,
    #[error("rank {rank} exceeds the supported maximum {max}")]
    RankTooLarge { rank: usize, max: usize },
    #[error("budget exceeded in {what}: needed about {needed}, cap is {cap}")]
    BudgetExceeded { what: &'static str, needed: f64, cap: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature failed to reach tolerance {tol:e} (best error {error:e} after {evaluations} evaluations)")]
    QuadratureFailure { tol: f64, error: f64, evaluations: usize },
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("zeta has a pole at s = 1")]
    PoleAtOne,
    #[error("s = {s} lies outside the convergence band ({a}, {b})")]
    OutOfBand { s: f64, a: f64, b: f64 },
    #[error("sampled value {value:e} at u = {u} exceeds the declared envelope {envelope:e}")]
    EnvelopeViolation { u: f64, value: f64, envelope: f64 },
    #[error("vector lies exactly on the sphere of radius r; the t -> infinity limit is 1/2 there")]
    BoundaryVector,
    #[error("rank {rank} is not supported here (maximum {max})")]
    RankUnsupported { rank: usize, max: usize },
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = {0} is even; only odd primes are supported")]
    EvenPrime(u64),
    #[error("gram matrix is not integral")]
    NotIntegral,
    #[error("cannot factor {0} within the trial-division budget")]
    Unfactorable(String),
    #[error("delta series tail cannot be bounded at x = {x} with {available} coefficients")]
    TailUnbounded { x: f64, available: usize },
    #[error("no interior maximum found in the search interval")]
    NoInteriorMax,
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
