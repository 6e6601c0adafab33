//! Small shared linear-algebra helpers on top of the LAPACK-backed solvers.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::C64;

/// Conjugate transpose.
pub(crate) fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// (a + a†)/2, forcing exact Hermiticity after a BLAS product.
pub(crate) fn hermitize(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let mut h = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        h[[i, i]] = C64::new(a[[i, i]].re, 0.0);
        for j in (i + 1)..n {
            let v = 0.5 * (a[[i, j]] + a[[j, i]].conj());
            h[[i, j]] = v;
            h[[j, i]] = v.conj();
        }
    }
    h
}

pub(crate) fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub(crate) fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

pub(crate) fn hermiticity_violation(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub(crate) fn is_hermitian(a: &Array2<C64>, tol: f64) -> bool {
    a.nrows() == a.ncols() && hermiticity_violation(a) <= tol
}

/// Hermitian eigendecomposition with ascending eigenvalues and eigenvectors
/// in the columns of the returned matrix.
pub(crate) fn eigh_ascending(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (w, v) = a.eigh(UPLO::Lower)?;
    // The backend hands row-major complex input to LAPACK in its transposed
    // (Fortran) view, so the columns it returns diagonalize the conjugate
    // matrix; conjugating restores h v_k = w_k v_k.
    let v = v.mapv(|z| z.conj());
    // LAPACK returns ascending order already; guard against surprises.
    for k in 1..w.len() {
        if w[k] < w[k - 1] {
            return Err(Error::NumericalContract(
                "eigenvalues not in ascending order".into(),
            ));
        }
    }
    Ok((w, v))
}

/// Identity matrix.
pub(crate) fn eye(n: usize) -> Array2<C64> {
    Array2::eye(n)
}
