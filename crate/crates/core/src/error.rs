use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("simplex iteration limit reached after {pivots} pivots")]
    IterationLimit { pivots: usize },

    #[error("cutting-plane limit reached after {cuts} cuts (numerically marginal instance)")]
    CutLimit { cuts: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("could not construct a spanning point set after {attempts} attempts")]
    ConstructionFailure { attempts: usize },

    #[error("affine dependence has entries of only one sign")]
    DegenerateDependence,

    #[error("oracle reported labeling {labeling:#b} realizable with margin {margin:e}")]
    OracleDisagreement { labeling: u64, margin: f64 },

    #[error("cannot tighten threshold of subset {subset:#b}: witness does not cut it out")]
    ImpossibleTightening { subset: u64 },

    #[error("non-positive separation: q = {q:e}, in-slack = {in_slack:e}")]
    NonPositiveSeparation { q: f64, in_slack: f64 },

    #[error("no admissible spacing after {doublings} doublings (delta = {delta:e}); use a larger delta or fewer components")]
    SpacingSearchExhausted { doublings: usize, delta: f64 },

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
