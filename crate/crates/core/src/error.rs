use thiserror::Error;

/// Errors raised by the modular-flow library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("density matrix invalid: {0}")]
    InvalidDensity(DensityViolation),

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("function undefined at eigenvalue {eigenvalue:e}")]
    Evaluation { eigenvalue: f64 },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("resource cap exceeded: projected degree {projected_degree} > cap {cap}")]
    Resource { projected_degree: u64, cap: u64 },

    #[error("malformed input: {0}")]
    Format(String),
}

/// The density-matrix invariant that failed validation.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityViolation {
    NotSquare { rows: usize, cols: usize },
    NotHermitian { deviation: f64 },
    Trace { trace: f64 },
    NegativeEigenvalue { eigenvalue: f64 },
}

impl std::fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityViolation::NotSquare { rows, cols } => {
                write!(f, "not square ({rows}x{cols})")
            }
            DensityViolation::NotHermitian { deviation } => {
                write!(f, "Hermiticity violated (max |M - M^dagger| = {deviation:.3e})")
            }
            DensityViolation::Trace { trace } => write!(f, "trace is {trace}, expected 1"),
            DensityViolation::NegativeEigenvalue { eigenvalue } => {
                write!(f, "negative eigenvalue {eigenvalue:e}")
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
