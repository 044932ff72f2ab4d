use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("arity mismatch: expected {expected} coefficients, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reduced system is singular (theta = {theta:?}, condition estimate {condition:.3e})")]
    SingularReducedSystem { theta: Vec<f64>, condition: f64 },

    #[error("matrix is not positive definite (pivot {pivot} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    #[error("matrix is singular (no pivot in column {column})")]
    Singular { column: usize },

    #[error("numerical breakdown after {iterations} iterations: {reason}")]
    NumericalBreakdown {
        iterations: usize,
        reason: String,
        /// Everything recorded before the offending step.
        partial: Option<Box<crate::krylov::KrylovTrace>>,
    },

    #[error("reduced model is empty (basis rank 0)")]
    EmptyModel,

    #[error("corrupt manifest: {0}")]
    CorruptManifest(String),

    #[error("payload size mismatch: manifest describes {expected} bytes, file has {got}")]
    PayloadSizeMismatch { expected: u64, got: u64 },

    #[error("checksum mismatch: manifest {expected}, payload {got}")]
    HashMismatch { expected: String, got: String },

    #[error("matrix market parse error at line {line}: {message}")]
    MatrixMarket { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
