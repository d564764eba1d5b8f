use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (max |A - A^dagger| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("density matrix trace {trace} is not 1")]
    BadTrace { trace: f64 },

    /// A numerical identity that must hold exactly (up to round-off) was violated.
    #[error("numerical integrity failure [{identity}]: {detail}")]
    Integrity {
        identity: &'static str,
        detail: String,
    },
}

impl Error {
    pub(crate) fn mismatch(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }

    pub(crate) fn integrity(identity: &'static str, detail: impl Into<String>) -> Self {
        Error::Integrity {
            identity,
            detail: detail.into(),
        }
    }
}
