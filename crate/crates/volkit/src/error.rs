use roughvol::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] roughvol::Error),

    #[error("column {column:?} not found (available: {available:?})")]
    UnknownColumn { column: String, available: Vec<String> },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("no usable rows in {0}")]
    EmptyResult(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Core(e) => e.kind(),
            Error::Usage(_) => ErrorKind::Usage,
            _ => ErrorKind::Data,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Usage => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
