use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("need {needed} moments, only {available} available")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("functional is not positive definite at degree {0}")]
    NotPositiveDefinite(usize),

    #[error("functional is degenerate (zero norm) at degree {0}")]
    Degenerate(usize),

    #[error("invalid Sobolev specification: {0}")]
    InvalidSpec(String),

    #[error("recurrence entry ({row}, {col}) lies outside the expected band")]
    SymmetryViolated { row: usize, col: usize },

    #[error("connection entry ({row}, {col}) lies below the allowed subdiagonal")]
    BandViolation { row: usize, col: usize },

    #[error("identity violated at {location}: worst residual {residual}")]
    IdentityViolated { location: String, residual: String },

    #[error("pivot block {0} is singular")]
    SingularPivotBlock(usize),

    #[error("leading coefficient of matrix polynomial {0} is singular")]
    SingularLeading(usize),

    #[error("sequence too short: need {needed} members, have {available}")]
    InsufficientSequence { needed: usize, available: usize },

    #[error("no operator of the requested order and degree: {0}")]
    Infeasible(String),

    #[error("operator not unique: homogeneous nullspace has dimension {0}")]
    Underdetermined(usize),

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
