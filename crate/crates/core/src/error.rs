use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or insufficient input data.
    Data,
    /// A numerical procedure failed or produced an unusable result.
    Numerical,
    /// Invalid parameters supplied by the caller.
    Usage,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series too short: need more than {required} observations, got {actual}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("non-positive value {value} at index {index} cannot be log-transformed")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("duplicate dates: {0:?}")]
    DuplicateDates(Vec<String>),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("circulant embedding is not nonnegative definite (min eigenvalue {min_eigenvalue:e}, embedding size {size})")]
    EmbeddingNotNonnegative { min_eigenvalue: f64, size: usize },

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e} above tolerance")]
    QuadratureNonconvergence { estimate: f64, error: f64 },

    #[error("overflow: exponent {0} too large to exponentiate")]
    Overflow(f64),

    #[error("insufficient history: need {required} observations, got {actual}")]
    InsufficientHistory { required: usize, actual: usize },

    #[error("singular normal equations")]
    SingularSystem,

    #[error("unstable Hawkes kernel: L1 norm {0} >= 1")]
    UnstableKernel(f64),

    #[error("event budget of {0} exceeded")]
    EventBudgetExceeded(usize),

    #[error("too few blocks/bins: need at least {required}, got {actual}")]
    TooFewBlocks { required: usize, actual: usize },

    #[error("segment {segment} too short: {length} observations")]
    SegmentTooShort { segment: usize, length: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::UnstableKernel(_) => ErrorKind::Usage,
            Error::EmbeddingNotNonnegative { .. }
            | Error::QuadratureNonconvergence { .. }
            | Error::Overflow(_)
            | Error::SingularSystem
            | Error::DegenerateRegression(_)
            | Error::EventBudgetExceeded(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
