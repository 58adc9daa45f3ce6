use thiserror::Error;

use crate::scalar::Field;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("dilation parameter must be a positive rational, got {0}")]
    InvalidDilation(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("flag is not in the N-hat chart: {0}")]
    NotInChart(String),
    #[error("invalid field automorphism: {0}")]
    InvalidFieldAutomorphism(String),
    #[error("not a graded automorphism: {0}")]
    NotAnAutomorphism(String),
    #[error("unsupported range: {0}")]
    UnsupportedRange(String),
    #[error("beta undefined: line lies in W^+_{0}")]
    UndefinedBeta(usize),
    #[error("not a projective frame: {0}")]
    NotAFrame(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("sample hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("degenerate map: {0}")]
    DegenerateMap(String),
    #[error("map is not fibration-preserving: {0}")]
    NotFibrationPreserving(String),
    #[error("map is not projective: {0}")]
    NotProjective(String),
    #[error("outside the declared oracle domain: {0}")]
    OutsideDomain(String),
    #[error("no escape flag: {0}")]
    NoEscape(String),
    #[error("matrix is not lower unipotent: {0}")]
    NotLowerUnipotent(String),
    #[error("not Pansu differentiable here: {0}")]
    NotPansuDifferentiable(String),
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
    #[error("pullback hypotheses fail: {0}")]
    HypothesesFailed(String),
    #[error("bump support is not contained in the box")]
    BumpOutsideBox,
    #[error("parse error: {0}")]
    Parse(String),
}
