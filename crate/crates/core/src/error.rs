//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("matrix is not Hermitian (max |H - H†| = {0:.3e})")]
    NotHermitian(f64),

    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("unknown region tag `{0}`")]
    UnknownRegion(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A value violated a numerical tolerance that separates roundoff from a
    /// genuine contract breach (e.g. an overlap eigenvalue far outside [0, 1]).
    #[error("numerical contract violated: {0}")]
    NumericalContract(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("quadrature did not converge: {0}")]
    Accuracy(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear algebra backend: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),
}

impl Error {
    /// True for failures of a numerical tolerance contract, as opposed to
    /// malformed input. CLI consumers map these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian(_)
                | Error::NumericalContract(_)
                | Error::IllConditioned(_)
                | Error::Accuracy(_)
                | Error::Backend(_)
        )
    }
}
