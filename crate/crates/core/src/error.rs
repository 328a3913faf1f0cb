use thiserror::Error;

use crate::polygon_transform::ConvergenceReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size {got}: need at least {min}")]
    InvalidSize { got: usize, min: usize },

    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain { name: &'static str, value: f64, expected: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "theta = {theta} lies within {tolerance:e} of the dominance threshold {threshold}; two eigenvalues coincide"
    )]
    AmbiguousDominance { theta: f64, threshold: f64, tolerance: f64 },

    #[error("iteration cannot converge: {reason}")]
    NonConvergence { reason: String },

    #[error("iteration did not converge within {} steps (last residual {:e})", .report.steps, .report.last_residual())]
    Timeout { report: Box<ConvergenceReport> },

    #[error("overlap eigenvalue {value:e} at index {index} is not positive; the basis is overcomplete")]
    NonPositiveOverlap { index: usize, value: f64 },

    #[error("energy {energy} meV violates the {bound} bound {limit} meV of the bound-state window")]
    OutsideWindow { energy: f64, bound: &'static str, limit: f64 },

    #[error("wavefunction derivative mismatch {mismatch:e} at the well edge exceeds {tolerance:e}; energy is not a bound state")]
    ContinuityViolation { mismatch: f64, tolerance: f64 },

    #[error("geometry admits no symmetric bound state; cannot build a ring basis")]
    EmptyBasis,

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Integration { requested: f64, achieved: f64 },

    #[error("diagonal {value} is below the minimum {minimum}; no real angle reproduces it")]
    NoRealAngle { value: f64, minimum: f64 },

    #[error("rotation degenerates (alpha = 0)")]
    DegenerateRotation,

    #[error("no real rotation exists: {reason}")]
    NoRealSolution { reason: String },

    #[error("matrix is not nearest-neighbour: entry ({row}, {col}) = {value:e}")]
    NotTridiagonal { row: usize, col: usize, value: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
}

impl Error {
    /// Input validation failures, as opposed to numerical failures on valid input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSize { .. }
                | Error::Domain { .. }
                | Error::DimensionMismatch { .. }
                | Error::OutsideWindow { .. }
                | Error::NoRealAngle { .. }
                | Error::NotHermitian { .. }
        )
    }
}

pub(crate) fn check_open_interval(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    expected: &'static str,
) -> Result<()> {
    if value.is_finite() && value > lo && value < hi {
        Ok(())
    } else {
        Err(Error::Domain { name, value, expected })
    }
}
