use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate segment between nodes {index} and {next}", next = .index + 1)]
    DegenerateSegment { index: usize },

    #[error("curve needs at least {min} nodes, got {got}")]
    TooFewNodes { got: usize, min: usize },

    #[error("non-finite coordinate at node {index}")]
    NonFinite { index: usize },

    #[error("total length is zero")]
    LengthZero,

    #[error("velocity derivative is singular at k = 0 (power law with eps = 0)")]
    SingularDerivative,

    #[error("velocity model is not parabolic: beta'_k = {value} at node {index}")]
    NonParabolic { index: usize, value: f64 },

    #[error("operation requires the asymptotically uniform strategy")]
    WrongStrategy,

    #[error("inconsistent array lengths: expected {expected}, got {got}")]
    InconsistentLengths { expected: usize, got: usize },

    #[error("tangential source violates periodic compatibility: defect {defect:e} exceeds {limit:e}")]
    CompatibilityViolation { defect: f64, limit: f64 },

    #[error("singular cyclic tridiagonal system (zero pivot at row {row})")]
    SingularMatrix { row: usize },

    #[error("mesh collapse at segment {index}")]
    MeshCollapse { index: usize },

    #[error("curvature blow-up: max |k| = {max_k:e} exceeds {limit:e}")]
    CurvatureBlowup { max_k: f64, limit: f64 },

    #[error("step {step} at t = {t}: {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("scenario `{0}` has no exact observable for a convergence study")]
    NoExactSolution(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Strips `Step` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
