use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-manifold {0}")]
    NonManifold(String),

    #[error("inconsistent orientation: {0}")]
    Orientation(String),

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("mesh is not planar")]
    NotPlanar,

    #[error("interior block is singular: {0}")]
    SingularInterior(String),

    #[error("requested {requested} eigenvalues but only {available} degrees of freedom")]
    CountTooLarge { requested: usize, available: usize },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("eigensolver breakdown: {0}")]
    EigenBreakdown(String),

    #[error("eigenvalue {value:e} is negative beyond round-off (largest {largest:e})")]
    NegativeEigenvalue { value: f64, largest: f64 },

    #[error("{kind}: expected {expected} zero modes, found {found}")]
    ZeroModeMismatch {
        kind: String,
        expected: usize,
        found: usize,
    },

    #[error("period obstruction: rotated gradient overlaps harmonic fields (relative overlap {overlap:e})")]
    PeriodObstruction { overlap: f64 },

    #[error("field is not discretely harmonic (relative residual {0:e})")]
    NotHarmonic(f64),

    #[error("constraint system admits only the zero solution: {0}")]
    DegenerateConstraints(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("out of implemented scope: {0}")]
    OutOfScope(String),

    #[error("constrained space is empty (mesh too coarse)")]
    EmptySpace,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
