//! Circulant matrix algebra.
//!
//! A circulant matrix is stored by its zero-based first row `c`, with
//! `entry(mu, nu) = c[(nu - mu) mod n]`. An overlap matrix written with a
//! unit diagonal followed by `s_2, ..., s_n` maps onto `c = [1, s_2, ..., s_n]`.
//!
//! Every circulant matrix is diagonalised by the discrete Fourier basis
//! `v_j = (1, w_j, ..., w_j^{n-1}) / sqrt(n)` with `w_j = exp(2 pi i j / n)`,
//! independently of its entries. The eigenvalue belonging to `v_j` is the
//! first-row polynomial `sum_m c[m] w_j^m`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Smallest admissible overlap eigenvalue.
pub const OVERLAP_FLOOR: f64 = 1e-10;

/// Imaginary parts of Hermitian spectra below this are rounding noise.
const HERMITIAN_IMAG_TOL: f64 = 1e-12;

/// `exp(2 pi i m / n)`, with `m` reduced modulo `n` first.
pub fn root_of_unity(m: usize, n: usize) -> Complex64 {
    let m = m % n;
    Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantMatrix {
    first_row: Vec<Complex64>,
}

impl CirculantMatrix {
    pub fn new(first_row: Vec<Complex64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::InvalidSize { got: 0, min: 1 });
        }
        Ok(Self { first_row })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        if let Some(first) = row.first_mut() {
            *first = Complex64::new(1.0, 0.0);
        }
        Self::new(row)
    }

    /// Reads the first row of a dense square matrix and reports the largest
    /// deviation of any entry from its cyclic counterpart.
    pub fn from_dense(m: &DMatrix<Complex64>) -> Result<(Self, f64)> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
        }
        let first_row: Vec<_> = (0..n).map(|nu| m[(0, nu)]).collect();
        let c = Self::new(first_row)?;
        let mut deviation = 0.0_f64;
        for mu in 0..n {
            for nu in 0..n {
                deviation = deviation.max((m[(mu, nu)] - c.entry(mu, nu)).norm());
            }
        }
        Ok((c, deviation))
    }

    pub fn len(&self) -> usize {
        self.first_row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_row.is_empty()
    }

    pub fn first_row(&self) -> &[Complex64] {
        &self.first_row
    }

    pub fn entry(&self, mu: usize, nu: usize) -> Complex64 {
        let n = self.len();
        self.first_row[(nu + n - mu % n) % n]
    }

    /// Largest `|c[(n-j) mod n] - conj(c[j])|`; zero for a Hermitian matrix.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.len();
        (0..n).map(|j| (self.first_row[(n - j) % n] - self.first_row[j].conj()).norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |mu, nu| self.entry(mu, nu))
    }

    pub fn apply(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.len();
        if z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: z.len() });
        }
        // Skip zero diagonals so banded matrices stay O(n * bandwidth).
        let bands: Vec<(usize, Complex64)> =
            self.first_row.iter().copied().enumerate().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect();
        Ok((0..n).map(|mu| bands.iter().map(|&(m, c)| c * z[(mu + m) % n]).sum()).collect())
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        circulant_eigenvalues(self)
    }
}

/// Unitary matrix whose column `j` is the Fourier vector `v_j`.
pub fn fourier_eigenvectors(n: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |mu, j| root_of_unity(j * mu, n) * scale)
}

/// `lambda_j = sum_m c[m] w_j^m`. For Hermitian input the imaginary parts
/// are rounding noise and are set to zero.
pub fn circulant_eigenvalues(c: &CirculantMatrix) -> Vec<Complex64> {
    let n = c.len();
    let hermitian = c.is_hermitian(HERMITIAN_IMAG_TOL * max_abs(c.first_row()).max(1.0));
    (0..n)
        .map(|j| {
            let lambda: Complex64 = c.first_row().iter().enumerate().map(|(m, &cm)| cm * root_of_unity(j * m, n)).sum();
            if hermitian {
                Complex64::new(lambda.re, 0.0)
            } else {
                lambda
            }
        })
        .collect()
}

fn max_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Solution of `H Phi = S Phi Lambda` with `Phi^* S Phi = I`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigenSolution {
    /// Generalized eigenvectors, one per column.
    pub phi: DMatrix<Complex64>,
    pub lambda: Vec<f64>,
}

impl GeneralizedEigenSolution {
    /// `max |H Phi - S Phi Lambda|` over all entries.
    pub fn residual(&self, h: &DMatrix<Complex64>, s: &DMatrix<Complex64>) -> f64 {
        let hp = h * &self.phi;
        let sp = s * &self.phi;
        let mut worst = 0.0_f64;
        for (j, &lambda) in self.lambda.iter().enumerate() {
            for i in 0..hp.nrows() {
                worst = worst.max((hp[(i, j)] - sp[(i, j)] * lambda).norm());
            }
        }
        worst
    }

    /// `max |Phi^* S Phi - I|`.
    pub fn orthonormality_error(&self, s: &DMatrix<Complex64>) -> f64 {
        let g = self.phi.adjoint() * s * &self.phi;
        let n = g.nrows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut v = self.lambda.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Closed-form solution of the Hermitian circulant pencil `(H, S)`.
///
/// Both matrices share the Fourier eigenvectors, so `Lambda = Lambda_H / Lambda_S`
/// entrywise and `Phi = Phi_S Lambda_S^{-1/2}`. Columns stay in Fourier order.
pub fn solve_generalized_circulant(h: &CirculantMatrix, s: &CirculantMatrix) -> Result<GeneralizedEigenSolution> {
    let n = h.len();
    if s.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: s.len() });
    }
    for (m, tol) in [(h, max_abs(h.first_row())), (s, max_abs(s.first_row()))] {
        let deviation = m.hermitian_deviation();
        if deviation > 1e-10 * tol.max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
    }

    let lambda_h = circulant_eigenvalues(h);
    let lambda_s = circulant_eigenvalues(s);
    if let Some((index, value)) = lambda_s.iter().map(|l| l.re).enumerate().find(|(_, l)| *l <= OVERLAP_FLOOR) {
        return Err(Error::NonPositiveOverlap { index, value });
    }

    let mut phi = fourier_eigenvectors(n);
    for (j, ls) in lambda_s.iter().enumerate() {
        let scale = 1.0 / ls.re.sqrt();
        phi.column_mut(j).scale_mut(scale);
    }
    let lambda = lambda_h.iter().zip(&lambda_s).map(|(lh, ls)| lh.re / ls.re).collect();
    Ok(GeneralizedEigenSolution { phi, lambda })
}
