//! Dictionary between the polygon transformation `M(theta, lambda)` and the
//! ring Hamiltonian matrix.
//!
//! `M` has diagonal `W1 = |1 - w|^2 + |w|^2` and neighbour couplings
//! `W2 = w (1 - conj(w))` below the diagonal, `conj(W2)` above it. The ring's
//! raw matrix has a real diagonal `H11` and a real coupling `H12`. Shifting
//! the potential by `T = W1 - H11` matches the diagonal. Mixing adjacent
//! basis functions as
//!
//! ```text
//! psi1' = alpha psi1 + i beta psi2
//! psi2' = alpha psi2 - i beta psi1
//! ```
//!
//! turns the coupling into `H21' = (alpha^2 - beta^2) H12 + 2 i alpha beta H11`,
//! which equals `W2` when
//!
//! ```text
//! alpha^2 - beta^2 = Re(W2) / H12,    alpha beta = Im(W2) / (2 H11).
//! ```
//!
//! The rotated basis is not normalised: `|psi1'|^2 = alpha^2 + beta^2`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_open_interval, Error, Result};
use crate::ring_system::{RingMatrices, CIRCULANT_TOLERANCE};

/// Couplings smaller than this fraction of the diagonal count as zero.
pub const COUPLING_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetEntries {
    pub w1: f64,
    #[serde(with = "crate::serde_complex")]
    pub w2: Complex64,
}

fn check_angle(theta: f64, lambda: f64) -> Result<()> {
    check_open_interval("theta", theta, 0.0, FRAC_PI_2, "open interval (0, pi/2)")?;
    check_open_interval("lambda", lambda, 0.0, 1.0, "open interval (0, 1)")
}

/// `W1 = (1 - lambda)^2 + 2 (1 - lambda)^2 tan^2 theta + lambda^2` and
/// `W2 = lambda + i (1 - lambda) tan theta - lambda^2 - (1 - lambda)^2 tan^2 theta`.
pub fn target_entries(theta: f64, lambda: f64) -> Result<TargetEntries> {
    check_angle(theta, lambda)?;
    let rest = 1.0 - lambda;
    let t = theta.tan();
    let w1 = rest * rest + 2.0 * rest * rest * t * t + lambda * lambda;
    let w2 = Complex64::new(lambda - lambda * lambda - rest * rest * t * t, rest * t);
    Ok(TargetEntries { w1, w2 })
}

/// Potential shift `T = W1 - H11` that moves the raw diagonal onto `W1`.
pub fn shift_t(h11_raw: f64, theta: f64, lambda: f64) -> Result<f64> {
    Ok(target_entries(theta, lambda)?.w1 - h11_raw)
}

/// Angle whose `W1` equals `h_diag` at fixed `lambda`.
pub fn theta_from_diagonal(h_diag: f64, lambda: f64) -> Result<f64> {
    check_open_interval("lambda", lambda, 0.0, 1.0, "open interval (0, 1)")?;
    let rest = 1.0 - lambda;
    let minimum = rest * rest + lambda * lambda;
    if h_diag.is_nan() || h_diag < minimum {
        return Err(Error::NoRealAngle { value: h_diag, minimum });
    }
    Ok(((h_diag - minimum) / (2.0 * rest * rest)).sqrt().atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub alpha: f64,
    pub beta: f64,
}

/// Solves for the basis rotation that carries the real pair `(H11, H12)` onto
/// the complex coupling `w2`.
///
/// Eliminating `beta` leaves `alpha^4 - p alpha^2 - q^2 = 0` with
/// `p = Re(W2) / H12`, `q = Im(W2) / (2 H11)`; the positive root is taken,
/// and `beta = q / alpha`.
pub fn rotation_params(w2: Complex64, h11: f64, h12: f64) -> Result<Rotation> {
    if !(h11.is_finite() && h12.is_finite() && w2.re.is_finite() && w2.im.is_finite()) {
        return Err(Error::NoRealSolution { reason: "non-finite input".into() });
    }
    if h11 == 0.0 {
        return Err(Error::NoRealSolution { reason: "diagonal H11 vanishes".into() });
    }
    if h12.abs() <= COUPLING_FLOOR * h11.abs() {
        return Err(Error::NoRealSolution { reason: format!("coupling H12 = {h12:e} vanishes next to H11 = {h11:e}") });
    }
    let half_p = w2.re / (2.0 * h12);
    let q = w2.im / (2.0 * h11);
    let radicand = half_p + (half_p * half_p + q * q).sqrt();
    if radicand < 0.0 {
        return Err(Error::NoRealSolution { reason: format!("alpha^2 = {radicand:e} is negative") });
    }
    let alpha = radicand.sqrt();
    if alpha == 0.0 {
        return Err(Error::DegenerateRotation);
    }
    Ok(Rotation { alpha, beta: q / alpha })
}

/// `(H12', H21')` of the rotated basis for the real 2x2 block `h`.
pub fn rotated_offdiagonals(rotation: &Rotation, h: [[f64; 2]; 2]) -> (Complex64, Complex64) {
    let Rotation { alpha, beta } = *rotation;
    let [[h11, h12], [h21, h22]] = h;
    let mix = Complex64::new(0.0, alpha * beta * (h11 + h22));
    let h12p = Complex64::new(alpha * alpha * h12 - beta * beta * h21, 0.0) - mix;
    let h21p = Complex64::new(alpha * alpha * h21 - beta * beta * h12, 0.0) + mix;
    (h12p, h21p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceResult {
    pub theta: f64,
    pub lambda: f64,
    pub w1: f64,
    #[serde(with = "crate::serde_complex")]
    pub w2: Complex64,
    /// Raw diagonal and coupling the rotation was computed from.
    pub h11: f64,
    pub h12: f64,
    /// Potential shift (meV).
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(with = "crate::serde_complex")]
    pub rotated_h12: Complex64,
    #[serde(with = "crate::serde_complex")]
    pub rotated_h21: Complex64,
    /// Squared norm of each rotated basis function.
    pub rotated_norm_sq: f64,
    pub warning: String,
}

/// Shift and rotation for a raw nearest-neighbour pair `(h11, h12)`.
pub fn correspond(theta: f64, lambda: f64, h11: f64, h12: f64) -> Result<CorrespondenceResult> {
    let TargetEntries { w1, w2 } = target_entries(theta, lambda)?;
    let rotation = rotation_params(w2, h11, h12)?;
    let (rotated_h12, rotated_h21) = rotated_offdiagonals(&rotation, [[h11, h12], [h12, h11]]);
    let rotated_norm_sq = rotation.alpha * rotation.alpha + rotation.beta * rotation.beta;
    Ok(CorrespondenceResult {
        theta,
        lambda,
        w1,
        w2,
        h11,
        h12,
        t: w1 - h11,
        alpha: rotation.alpha,
        beta: rotation.beta,
        rotated_h12,
        rotated_h21,
        rotated_norm_sq,
        warning: format!("rotated basis is not normalised (squared norm {rotated_norm_sq:.6})"),
    })
}

/// Reads `(H11, H12)` from assembled ring matrices and maps them onto
/// `M(theta, lambda)`. The ring must be circulant, real and nearest-neighbour.
pub fn full_correspondence(theta: f64, lambda: f64, ring: &RingMatrices) -> Result<CorrespondenceResult> {
    let h = &ring.h;
    let n = ring.size();
    if n < 3 {
        return Err(Error::InvalidSize { got: n, min: 3 });
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let deviation = ring.circulant_deviation();
    if deviation > CIRCULANT_TOLERANCE {
        return Err(Error::NoRealSolution {
            reason: format!("ring matrix is not circulant (deviation {deviation:e})"),
        });
    }
    let imaginary = h.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imaginary > 1e-12 * scale {
        return Err(Error::NotHermitian { deviation: imaginary });
    }
    for nu in 2..n - 1 {
        let value = h[(0, nu)].norm();
        if value > 1e-8 * scale {
            return Err(Error::NotTridiagonal { row: 0, col: nu, value });
        }
    }
    correspond(theta, lambda, h[(0, 0)].re, h[(0, 1)].re)
}
