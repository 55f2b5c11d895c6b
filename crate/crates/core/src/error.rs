use thiserror::Error;

/// Errors raised by the geometric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("contract violation: expected rank {expected}, found rank {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("contract violation: dimension mismatch ({0})")]
    DimensionMismatch(String),

    #[error("unsupported rank {0}")]
    UnsupportedRank(usize),

    #[error("degenerate base metric")]
    DegenerateMetric,

    #[error("degenerate fiber: fiber length squared is {0}")]
    DegenerateFiber(f64),

    #[error("input is not symmetric/antisymmetric as required ({0})")]
    SymmetryViolation(String),

    #[error("matrix is not the bracket of an (h, k)-type Lie element (defect {0:e})")]
    NotLieElement(f64),

    #[error("oracle unreliable at this step size (error estimate {0:e})")]
    OracleUnreliable(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("mismatched grids: {0}")]
    MismatchedGrids(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
