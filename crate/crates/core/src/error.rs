use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weight sequence cutoff {p_max} is below the minimum of {min}")]
    CutoffTooSmall { p_max: usize, min: usize },
    #[error("weight sequence entry {index} is not a positive finite number")]
    NonPositiveEntry { index: usize },
    #[error("weight sequence must satisfy M_0 = 1 (got log M_0 = {0})")]
    NotNormalized(f64),
    #[error("maximizing index exceeds the cutoff; value is at least {lower_bound}")]
    CutoffExceeded { lower_bound: f64 },
    #[error("required condition {0} does not hold for this weight sequence")]
    ConditionMissing(&'static str),
    #[error("no witness pair found on the search grid")]
    SearchFailed,
    #[error("polynomial is not a harmonic homogeneous polynomial")]
    NotHarmonic,
    #[error("polynomial is zero")]
    ZeroPolynomial,
    #[error("malformed multi-index: {0}")]
    BadMultiIndex(String),
    #[error("beta must satisfy beta <= alpha and |beta| = |alpha| - 1")]
    BadBeta,
    #[error("frame is not orthogonal")]
    NonOrthogonalFrame,
    #[error("basis size guard exceeded: {monomials} monomials (limit {limit})")]
    SizeGuardExceeded { monomials: usize, limit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is outside the open unit ball or not on the sphere")]
    DomainViolation,
    #[error("expansion has {have} degrees, at least {need} are required")]
    InsufficientDegrees { have: usize, need: usize },
    #[error("weight sequence is quasianalytic; supports are not defined")]
    QuasianalyticWeight,
    #[error("region comes within the margin of the support estimate")]
    RegionOverlapsSupport,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
