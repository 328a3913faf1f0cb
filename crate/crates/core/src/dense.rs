//! Dense Hermitian eigensolvers, used where circulant structure is absent
//! and as the independent route for cross-checking the closed forms.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::circulant::{GeneralizedEigenSolution, OVERLAP_FLOOR};
use crate::error::{Error, Result};

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Solves `H Phi = S Phi Lambda` by whitening with `S^{-1/2}`.
///
/// Eigenvalues are returned in ascending order.
pub fn generalized_eigen_dense(h: &DMatrix<Complex64>, s: &DMatrix<Complex64>) -> Result<GeneralizedEigenSolution> {
    let n = h.nrows();
    for m in [h, s] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
        }
    }
    let (s_values, u) = hermitian_eigen(s);
    if let Some((index, &value)) = s_values.iter().enumerate().find(|(_, v)| **v <= OVERLAP_FLOOR) {
        return Err(Error::NonPositiveOverlap { index, value });
    }
    let inv_sqrt = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        s_values.iter().map(|v| Complex64::new(1.0 / v.sqrt(), 0.0)),
    ));
    let s_inv_sqrt = &u * inv_sqrt * u.adjoint();
    let whitened = &s_inv_sqrt * h * &s_inv_sqrt;
    let (lambda, y) = hermitian_eigen(&whitened);
    Ok(GeneralizedEigenSolution { phi: s_inv_sqrt * y, lambda })
}
