use thiserror::Error;

use crate::poly::Monomial;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid calibration matrix: {0}")]
    InvalidCalibration(String),

    #[error("rotation axis must be unit length (norm {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("vertical direction `{field}` is not unit length (norm {norm})")]
    NonUnitVertical { field: String, norm: f64 },

    #[error("zero-length vector")]
    ZeroVector,

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error(
        "elimination did not produce the required reducers (rank {rank}, missing {missing:?})"
    )]
    DegenerateElimination { rank: usize, missing: Vec<Monomial> },

    #[error("template mismatch: monomial {0} of the instance is not a template column")]
    TemplateMismatch(Monomial),

    #[error("normal form of {monomial} escapes the quotient basis")]
    ReductionEscape { monomial: Monomial },

    #[error("need at least {needed} correspondences, got {got}")]
    TooFewCorrespondences { needed: usize, got: usize },

    #[error("no hypothesis reached a consensus of at least 3 inliers")]
    NoConsensus,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
