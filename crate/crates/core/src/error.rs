use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("label `{0}` has non-positive dimension")]
    NonPositiveDim(String),
    #[error("label `{0}` appears in both operands")]
    LabelCollision(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("requested order is not a permutation of the operator labels")]
    NotAPermutation,
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("shared label `{label}` has dimension {left} on the left and {right} on the right")]
    DimMismatchOnSharedLabel { label: String, left: usize, right: usize },
    #[error("dense representation needs total dimension {needed}, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("map is not a projector")]
    NotAProjector,
    #[error("trace value is zero")]
    ZeroGamma,
    #[error("input set has zero trace value")]
    ZeroGammaIn,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("projector is not unital")]
    NonUnitalProjector,
    #[error("bad dimensions: {0}")]
    BadDims(String),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
