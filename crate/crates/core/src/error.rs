use thiserror::Error;

/// Errors raised across the solver laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("coefficient is not elliptic: a(x) = {value} at ({x}, {y})")]
    Ellipticity { value: f64, x: f64, y: f64 },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid overlap: {layers} layers with k = {k}")]
    Overlap { layers: usize, k: usize },
    #[error("spectral estimation failed: {0}")]
    Estimation(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("numerical consistency violated: {0}")]
    Consistency(String),
    #[error("oracle size cap exceeded: {0}")]
    OracleCap(String),
    #[error("singular matrix at pivot {0}")]
    Singular(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
