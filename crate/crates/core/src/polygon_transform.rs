//! Polygon transformation by similar triangles and its eigenpolygons.
//!
//! A polygon is a vector `z` of `n >= 3` complex vertices. For angle
//! `theta` in `(0, pi/2)` and ratio `lambda` in `(0, 1)` the transformation
//! `z -> M z` uses the Hermitian tridiagonal-cyclic circulant
//!
//! ```text
//! M[mu][mu]             = |1 - w|^2 + |w|^2
//! M[(nu + 1) % n][nu]   = w (1 - conj(w))
//! M[mu][(mu + 1) % n]   = conj(w) (1 - w)
//! ```
//!
//! with `w = lambda + i (1 - lambda) tan(theta)`. Its eigenvectors are the
//! Fourier eigenpolygons `f_k[mu] = r^{k mu} / sqrt(n)`, `r = exp(2 pi i / n)`,
//! with eigenvalues `eta_k = |1 - conj(w) + r^k conj(w)|^2 > 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::circulant::{root_of_unity, CirculantMatrix};
use crate::error::{check_open_interval, Error, Result};

pub const MIN_VERTICES: usize = 3;

/// Distance from a dominance threshold below which the dominant index is
/// reported as ambiguous.
pub const THRESHOLD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Complex64>,
}

impl Polygon {
    pub fn new(vertices: Vec<Complex64>) -> Result<Self> {
        if vertices.len() < MIN_VERTICES {
            return Err(Error::InvalidSize { got: vertices.len(), min: MIN_VERTICES });
        }
        if let Some(bad) = vertices.iter().find(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain {
                name: "vertex",
                value: if bad.re.is_finite() { bad.im } else { bad.re },
                expected: "finite",
            });
        }
        Ok(Self { vertices })
    }

    /// Counterclockwise regular polygon on the unit circle, `z_mu = r^mu`.
    pub fn regular(n: usize) -> Result<Self> {
        Self::new((0..n).map(|mu| root_of_unity(mu, n)).collect())
    }

    /// Random polygon with vertices uniform in `[-1, 1)^2`.
    ///
    /// SplitMix64 seeded with `seed`; each vertex draws the real part and
    /// then the imaginary part as `2 * (x >> 11) * 2^-53 - 1`.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let mut unit = move || 2.0 * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64) - 1.0;
        Self::new(
            (0..n)
                .map(|_| {
                    let re = unit();
                    let im = unit();
                    Complex64::new(re, im)
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn norm(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn centroid(&self) -> Complex64 {
        centroid(self)
    }
}

pub fn centroid(polygon: &Polygon) -> Complex64 {
    let n = polygon.len() as f64;
    polygon.vertices.iter().sum::<Complex64>() / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    theta: f64,
    lambda: f64,
}

impl TransformParams {
    pub fn new(theta: f64, lambda: f64) -> Result<Self> {
        check_open_interval("theta", theta, 0.0, FRAC_PI_2, "open interval (0, pi/2)")?;
        check_open_interval("lambda", lambda, 0.0, 1.0, "open interval (0, 1)")?;
        Ok(Self { theta, lambda })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `w = lambda + i (1 - lambda) tan(theta)`.
    pub fn w(&self) -> Complex64 {
        Complex64::new(self.lambda, (1.0 - self.lambda) * self.theta.tan())
    }

    /// `|1 - w|^2 + |w|^2`.
    pub fn diagonal(&self) -> f64 {
        let w = self.w();
        (Complex64::new(1.0, 0.0) - w).norm_sqr() + w.norm_sqr()
    }

    /// `w (1 - conj(w))`, placed at `(mu, nu)` with `mu = (nu + 1) mod n`.
    pub fn sub_diagonal(&self) -> Complex64 {
        let w = self.w();
        w * (Complex64::new(1.0, 0.0) - w.conj())
    }

    /// `conj(w) (1 - w)`, placed at `(mu, nu)` with `nu = (mu + 1) mod n`.
    pub fn super_diagonal(&self) -> Complex64 {
        let w = self.w();
        w.conj() * (Complex64::new(1.0, 0.0) - w)
    }

    pub fn is_half(&self) -> bool {
        (self.lambda - 0.5).abs() < 1e-12
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < MIN_VERTICES {
        Err(Error::InvalidSize { got: n, min: MIN_VERTICES })
    } else {
        Ok(())
    }
}

pub fn build_transform_matrix(params: &TransformParams, n: usize) -> Result<CirculantMatrix> {
    check_size(n)?;
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    row[0] = Complex64::new(params.diagonal(), 0.0);
    row[1] = params.super_diagonal();
    row[n - 1] = params.sub_diagonal();
    CirculantMatrix::new(row)
}

/// `eta_k = |1 - conj(w) + r^k conj(w)|^2` for `k = 0..n`.
pub fn eigenvalues_eta(params: &TransformParams, n: usize) -> Result<Vec<f64>> {
    check_size(n)?;
    let wb = params.w().conj();
    let one = Complex64::new(1.0, 0.0);
    Ok((0..n).map(|k| (one - wb + root_of_unity(k, n) * wb).norm_sqr()).collect())
}

/// Interior thresholds `theta_k = pi (2k + 1) / (2n)` for `k < floor(n/2)`.
/// The outer bounds `0` and `pi/2` are implied.
pub fn dominance_thresholds(n: usize) -> Vec<f64> {
    (0..n / 2).map(|k| PI * (2 * k + 1) as f64 / (2 * n) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DominanceMethod {
    /// Closed-form angular intervals, valid for `lambda = 1/2`.
    Interval,
    /// Argmax over the computed spectrum.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dominance {
    pub index: usize,
    pub method: DominanceMethod,
}

/// Index of the largest `eta_k`.
///
/// For `lambda = 1/2` this is the `k` with `theta` in `(theta_{k-1}, theta_k)`.
/// Otherwise the spectrum is searched directly and the result is flagged as
/// numeric.
pub fn dominant_index(params: &TransformParams, n: usize) -> Result<Dominance> {
    check_size(n)?;
    let theta = params.theta();
    if params.is_half() {
        let thresholds = dominance_thresholds(n);
        if let Some(&threshold) = thresholds.iter().find(|&&t| (theta - t).abs() < THRESHOLD_TOLERANCE) {
            return Err(Error::AmbiguousDominance { theta, threshold, tolerance: THRESHOLD_TOLERANCE });
        }
        let index = thresholds.iter().filter(|&&t| t < theta).count();
        return Ok(Dominance { index, method: DominanceMethod::Interval });
    }

    let eta = eigenvalues_eta(params, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]));
    let (best, second) = (order[0], order[1]);
    if eta[best] - eta[second] <= 1e-12 * eta[best] {
        return Err(Error::AmbiguousDominance { theta, threshold: theta, tolerance: 1e-12 });
    }
    Ok(Dominance { index: best, method: DominanceMethod::Numeric })
}

/// Unit-norm Fourier eigenpolygon `f_k[mu] = r^{k mu} / sqrt(n)`.
pub fn eigenpolygon(n: usize, k: usize) -> Vec<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..n).map(|mu| root_of_unity(k * mu, n) * scale).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenpolygonDecomposition {
    /// `c_k = <f_k, z>`.
    pub coefficients: Vec<Complex64>,
}

impl EigenpolygonDecomposition {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// The polygon `c_k f_k`.
    pub fn component(&self, k: usize) -> Vec<Complex64> {
        let c = self.coefficients[k];
        eigenpolygon(self.len(), k).into_iter().map(|f| f * c).collect()
    }

    pub fn reconstruct(&self) -> Vec<Complex64> {
        let n = self.len();
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            for (zi, ci) in z.iter_mut().zip(self.component(k)) {
                *zi += ci;
            }
        }
        z
    }

    /// `max_mu |z_mu - sum_k c_k f_k[mu]|`.
    pub fn residual(&self, polygon: &Polygon) -> f64 {
        polygon.vertices().iter().zip(self.reconstruct()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Share of the squared norm carried by eigenpolygon `k`.
    pub fn mass_fraction(&self, k: usize) -> f64 {
        let total: f64 = self.coefficients.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            0.0
        } else {
            self.coefficients[k].norm_sqr() / total
        }
    }
}

pub fn decompose(polygon: &Polygon) -> EigenpolygonDecomposition {
    let n = polygon.len();
    let scale = 1.0 / (n as f64).sqrt();
    let coefficients = (0..n)
        .map(|k| {
            polygon.vertices().iter().enumerate().map(|(mu, &z)| root_of_unity(k * mu, n).conj() * z).sum::<Complex64>()
                * scale
        })
        .collect();
    EigenpolygonDecomposition { coefficients }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationOptions {
    pub max_steps: usize,
    /// Stop once successive unit-norm iterates differ by less than this.
    pub tol: f64,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self { max_steps: 100_000, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub steps: usize,
    pub converged: bool,
    pub dominant: Dominance,
    /// `|z_{j+1} - z_j|` between successive unit-norm iterates.
    pub residuals: Vec<f64>,
    /// Share of the final polygon's squared norm on the dominant eigenpolygon.
    pub dominant_mass: f64,
    /// Rayleigh quotient of the final iterate.
    pub eigenvalue_estimate: f64,
}

impl ConvergenceReport {
    pub fn last_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }
}

/// Power iteration `z <- M z / |M z|` until the direction settles.
///
/// Returns the unit-norm limit polygon.
pub fn iterate_to_eigenshape(
    polygon: &Polygon,
    params: &TransformParams,
    options: &IterationOptions,
) -> Result<(Polygon, ConvergenceReport)> {
    let n = polygon.len();
    let dominant = dominant_index(params, n)?;
    let norm = polygon.norm();
    let start = decompose(polygon);
    if norm == 0.0 || start.coefficients[dominant.index].norm() <= 1e-14 * norm {
        return Err(Error::NonConvergence {
            reason: format!("polygon has no component along dominant eigenpolygon {}", dominant.index),
        });
    }

    let m = build_transform_matrix(params, n)?;
    let mut z: Vec<Complex64> = polygon.vertices().iter().map(|v| v / norm).collect();
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut eigenvalue_estimate = f64::NAN;
    while residuals.len() < options.max_steps {
        let mut next = m.apply(&z)?;
        // z has unit norm, so <z, Mz> is the Rayleigh quotient.
        eigenvalue_estimate = z.iter().zip(&next).map(|(a, b)| a.conj() * b).sum::<Complex64>().re;
        let len = next.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        next.iter_mut().for_each(|v| *v /= len);
        let step = z.iter().zip(&next).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        residuals.push(step);
        z = next;
        if step < options.tol {
            converged = true;
            break;
        }
    }

    let limit = Polygon::new(z)?;
    let report = ConvergenceReport {
        steps: residuals.len(),
        converged,
        dominant,
        residuals,
        dominant_mass: decompose(&limit).mass_fraction(dominant.index),
        eigenvalue_estimate,
    };
    if !converged {
        return Err(Error::Timeout { report: Box::new(report) });
    }
    Ok((limit, report))
}
