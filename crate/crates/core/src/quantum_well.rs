//! Finite square well on a circle.
//!
//! The circle has circumference `l` and periodic coordinate `x ~ x + l`. The
//! well occupies `|x| < L/2` with potential `V' - V0`; the barrier
//! `L/2 <= x <= l - L/2` sits at `V'`. Bound states live in the window
//! `V' - V0 < W < V'` with
//!
//! ```text
//! k     = sqrt(2m (W + V0 - V') / hbar^2)     inside the well
//! kappa = sqrt(-2m (W - V') / hbar^2)         in the barrier
//! ```
//!
//! so that `k^2 + kappa^2 = C0 = 2 m V0 / hbar^2`. Energies are in meV and
//! lengths in nm throughout.
//!
//! All root searches run on the relative energy `u = W - V'`, which keeps the
//! spectrum exactly covariant under a change of `V'`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, QuadOptions};

/// Electron mass in kg.
pub const ELECTRON_MASS: f64 = 9.109e-31;
/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.055e-34;
/// One meV in J.
pub const JOULES_PER_MEV: f64 = 1.602e-22;
const SQUARE_NM_PER_SQUARE_M: f64 = 1e18;

/// Relative derivative mismatch tolerated at the well edge.
pub const CONTINUITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellGeometry {
    /// Well width `L` (nm).
    pub width: f64,
    /// Circle circumference `l` (nm).
    pub circumference: f64,
    /// Well depth `V0` (meV).
    pub depth: f64,
    /// Constant offset `V'` of the whole potential (meV).
    pub shift: f64,
    /// Particle mass (kg).
    pub mass: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
}

impl WellGeometry {
    /// Electron in a well of width `width` on a circle of length
    /// `circumference`, no offset.
    pub fn new(width: f64, circumference: f64, depth: f64) -> Result<Self> {
        let g = Self { width, circumference, depth, shift: 0.0, mass: ELECTRON_MASS, hbar: HBAR };
        g.validate()?;
        Ok(g)
    }

    /// Circle of `wells` sites spaced `spacing` apart.
    pub fn for_ring(width: f64, spacing: f64, wells: usize, depth: f64) -> Result<Self> {
        Self::new(width, spacing * wells as f64, depth)
    }

    pub fn with_shift(mut self, shift: f64) -> Result<Self> {
        self.shift = shift;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain { name, value, expected: "finite and positive" })
            }
        };
        positive("width", self.width)?;
        positive("depth", self.depth)?;
        positive("mass", self.mass)?;
        positive("hbar", self.hbar)?;
        if !(self.circumference.is_finite() && self.circumference > self.width) {
            return Err(Error::Domain {
                name: "circumference",
                value: self.circumference,
                expected: "finite and larger than the well width",
            });
        }
        if !(self.shift.is_finite() && self.shift >= 0.0) {
            return Err(Error::Domain { name: "shift", value: self.shift, expected: "finite and non-negative" });
        }
        Ok(())
    }

    /// `2m / hbar^2` in 1 / (meV nm^2).
    pub fn wavenumber_scale(&self) -> f64 {
        2.0 * self.mass * JOULES_PER_MEV / (self.hbar * self.hbar) / SQUARE_NM_PER_SQUARE_M
    }

    /// Open energy window `(V' - V0, V')` in meV.
    pub fn window(&self) -> (f64, f64) {
        (self.shift - self.depth, self.shift)
    }

    fn relative_energy(&self, energy: f64) -> Result<f64> {
        let u = energy - self.shift;
        if u.is_nan() || u <= -self.depth {
            return Err(Error::OutsideWindow { energy, bound: "lower", limit: self.shift - self.depth });
        }
        if u.is_nan() || u >= 0.0 {
            return Err(Error::OutsideWindow { energy, bound: "upper", limit: self.shift });
        }
        Ok(u)
    }

    fn wavenumbers_relative(&self, u: f64) -> (f64, f64) {
        let s = self.wavenumber_scale();
        ((s * (u + self.depth)).sqrt(), (-s * u).sqrt())
    }

    /// Raw 4x4 continuity determinant.
    ///
    /// The barrier solution is written as `A+ exp(-kappa x) + A- exp(kappa (x - l))`,
    /// so every exponential entry is at most one and the determinant cannot
    /// overflow however large `kappa l` grows.
    fn determinant_relative(&self, u: f64) -> f64 {
        let (k, kappa) = self.wavenumbers_relative(u);
        let (half, l) = (0.5 * self.width, self.circumference);
        let far = (-kappa * (l - half)).exp();
        let near = (-kappa * half).exp();
        let (s, c) = (k * half).sin_cos();
        // cos(-x) = cos x, sin(-x) = -sin x.
        #[rustfmt::skip]
        let m = Matrix4::new(
            far, near, c, -s,
            -kappa * far, kappa * near, k * s, k * c,
            near, far, c, s,
            -kappa * near, kappa * far, -k * s, k * c,
        );
        m.determinant()
    }

    /// Closed-form expansion of the determinant with its leading factor
    /// `exp(-kappa L - 2 kappa l)` multiplied into every term.
    fn expanded_relative(&self, u: f64) -> f64 {
        let (k, kappa) = self.wavenumbers_relative(u);
        let (width, l) = (self.width, self.circumference);
        let (s, c) = (0.5 * k * width).sin_cos();
        let cross = (-kappa * l).exp();
        let inner = (kappa * width - 2.0 * kappa * l).exp();
        let outer = (-kappa * width).exp();
        let kk = kappa * k;
        (4.0 * kk * cross + 2.0 * kk * inner + 2.0 * kk * outer) * s * s
            + ((2.0 * kappa * kappa - 2.0 * k * k) * inner + (2.0 * k * k - 2.0 * kappa * kappa) * outer) * c * s
            + (4.0 * kk * cross - 2.0 * kk * inner - 2.0 * kk * outer) * c * c
    }

    /// `tanh(kappa (l - L) / 2)`: the barrier's slope-to-value ratio for an
    /// even state, divided by `kappa`.
    fn barrier_ratio(&self, kappa: f64) -> f64 {
        (0.5 * kappa * (self.circumference - self.width)).tanh()
    }

    /// The determinant factors (up to a positive weight) into an even part
    /// `k sin(kL/2) - kappa t cos(kL/2)` and an odd part
    /// `kappa sin(kL/2) + k t cos(kL/2)`, `t = tanh(kappa (l - L) / 2)`.
    fn parity_factors(&self, k: f64, kappa: f64) -> (f64, f64) {
        let t = self.barrier_ratio(kappa);
        let (s, c) = (0.5 * k * self.width).sin_cos();
        (k * s - kappa * t * c, kappa * s + k * t * c)
    }
}

/// `C0 = 2 m V0 / hbar^2` in 1/nm^2.
pub fn compute_c0(geometry: &WellGeometry) -> Result<f64> {
    geometry.validate()?;
    Ok(geometry.wavenumber_scale() * geometry.depth)
}

/// `(k, kappa)` for absolute energy `energy` (meV).
pub fn wavenumbers(energy: f64, geometry: &WellGeometry) -> Result<(f64, f64)> {
    geometry.validate()?;
    let u = geometry.relative_energy(energy)?;
    Ok(geometry.wavenumbers_relative(u))
}

/// Determinant of the continuity system; vanishes at bound-state energies.
pub fn determinant_condition(energy: f64, geometry: &WellGeometry) -> Result<f64> {
    geometry.validate()?;
    let u = geometry.relative_energy(energy)?;
    Ok(geometry.determinant_relative(u))
}

/// Expanded trigonometric-exponential form of [`determinant_condition`].
pub fn expanded_condition(energy: f64, geometry: &WellGeometry) -> Result<f64> {
    geometry.validate()?;
    let u = geometry.relative_energy(energy)?;
    Ok(geometry.expanded_relative(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    /// Energy `W` (meV).
    pub energy: f64,
    /// Interior wavenumber (1/nm).
    pub k: f64,
    /// Barrier decay constant (1/nm).
    pub kappa: f64,
    pub parity: Parity,
    /// Amplitude of the normalised symmetric wavefunction; odd states are
    /// located but not constructed.
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Uniform bracketing grid across the energy window.
    pub grid_points: usize,
    /// Density multiplier for re-scanning near-tangencies of the condition.
    pub refine_factor: usize,
    /// Bisection stops once the bracket is this narrow (meV).
    pub energy_tol: f64,
    pub count_limit: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { grid_points: 10_000, refine_factor: 10, energy_tol: 1e-12, count_limit: None }
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Brackets sign changes of `f` on the sampled points, re-scanning local
/// minima of `|f|` that show no sign change at `refine` times the density.
fn brackets<F: Fn(f64) -> f64>(f: &F, grid: &[f64], refine: usize) -> Vec<(f64, f64)> {
    let values: Vec<f64> = grid.iter().map(|&u| f(u)).collect();
    let mut out = Vec::new();
    for i in 0..grid.len().saturating_sub(1) {
        if values[i] == 0.0 {
            out.push((grid[i], grid[i]));
        } else if values[i] * values[i + 1] < 0.0 {
            out.push((grid[i], grid[i + 1]));
        }
    }
    if refine > 1 {
        for i in 1..grid.len().saturating_sub(1) {
            let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
            let dip = b.abs() < a.abs() && b.abs() < c.abs();
            let crosses = a * b <= 0.0 || b * c <= 0.0;
            if dip && !crosses {
                let steps = 2 * refine;
                let fine: Vec<f64> =
                    (0..=steps).map(|j| grid[i - 1] + (grid[i + 1] - grid[i - 1]) * j as f64 / steps as f64).collect();
                out.extend(brackets(f, &fine, 1));
            }
        }
    }
    out
}

/// All bound states in the window, ascending in energy.
pub fn find_bound_states(geometry: &WellGeometry, options: &SearchOptions) -> Result<Vec<BoundState>> {
    geometry.validate()?;
    if options.grid_points < 2 {
        return Err(Error::InvalidSize { got: options.grid_points, min: 2 });
    }
    let depth = geometry.depth;
    let n = options.grid_points;
    let grid: Vec<f64> = (1..n).map(|i| -depth + depth * i as f64 / n as f64).collect();
    let condition = |u: f64| geometry.determinant_relative(u);

    let mut roots: Vec<f64> = brackets(&condition, &grid, options.refine_factor)
        .into_iter()
        .map(|(lo, hi)| if lo == hi { lo } else { bisect(&condition, lo, hi, options.energy_tol) })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 10.0 * options.energy_tol);

    let mut states = Vec::with_capacity(roots.len());
    for u in roots {
        let (k, kappa) = geometry.wavenumbers_relative(u);
        let (even, odd) = geometry.parity_factors(k, kappa);
        let parity = if even.abs() <= odd.abs() { Parity::Even } else { Parity::Odd };
        let mut state = BoundState { energy: u + geometry.shift, k, kappa, parity, amplitude: None };
        if parity == Parity::Even {
            state.amplitude = Some(symmetric_wavefunction(&state, geometry)?.amplitude());
        }
        states.push(state);
    }
    if let Some(limit) = options.count_limit {
        states.truncate(limit);
    }
    Ok(states)
}

/// Lowest even bound state, if any.
pub fn ground_state(geometry: &WellGeometry, options: &SearchOptions) -> Result<Option<BoundState>> {
    let all = find_bound_states(geometry, &SearchOptions { count_limit: None, ..*options })?;
    Ok(all.into_iter().find(|s| s.parity == Parity::Even))
}

/// Even bound state on the circle, normalised over one period:
///
/// ```text
/// psi(x) = A cos(k x)                                           |x| < L/2
/// psi(x) = A cos(k L/2) / (exp(kappa (L - l)) + 1)
///          * (exp(-kappa (x - L/2)) + exp(kappa (x - l + L/2)))   L/2 <= x <= l - L/2
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricWavefunction {
    k: f64,
    kappa: f64,
    width: f64,
    circumference: f64,
    amplitude: f64,
    barrier_prefactor: f64,
}

impl SymmetricWavefunction {
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Junctions of one period: `[0, L/2, l - L/2, l]`.
    pub fn breakpoints(&self) -> [f64; 4] {
        let half = 0.5 * self.width;
        [0.0, half, self.circumference - half, self.circumference]
    }

    fn reduce(&self, x: f64) -> f64 {
        x.rem_euclid(self.circumference)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = self.reduce(x);
        let (half, l) = (0.5 * self.width, self.circumference);
        if y < half {
            self.amplitude * (self.k * y).cos()
        } else if y > l - half {
            self.amplitude * (self.k * (y - l)).cos()
        } else {
            self.amplitude
                * self.barrier_prefactor
                * ((-self.kappa * (y - half)).exp() + (self.kappa * (y - l + half)).exp())
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let y = self.reduce(x);
        let (half, l) = (0.5 * self.width, self.circumference);
        if y < half {
            -self.amplitude * self.k * (self.k * y).sin()
        } else if y > l - half {
            -self.amplitude * self.k * (self.k * (y - l)).sin()
        } else {
            self.amplitude
                * self.barrier_prefactor
                * self.kappa
                * ((self.kappa * (y - l + half)).exp() - (-self.kappa * (y - half)).exp())
        }
    }

    /// One-sided limits `(inside, barrier)` of `psi'` at `x = L/2`.
    pub fn edge_derivatives(&self) -> (f64, f64) {
        let half = 0.5 * self.width;
        let inside = -self.amplitude * self.k * (self.k * half).sin();
        let barrier = self.amplitude
            * self.barrier_prefactor
            * self.kappa
            * ((self.kappa * (2.0 * half - self.circumference)).exp() - 1.0);
        (inside, barrier)
    }

    /// One-sided limits `(inside, barrier)` of `psi` at `x = L/2`.
    pub fn edge_values(&self) -> (f64, f64) {
        let half = 0.5 * self.width;
        let inside = self.amplitude * (self.k * half).cos();
        let barrier =
            self.amplitude * self.barrier_prefactor * (1.0 + (self.kappa * (2.0 * half - self.circumference)).exp());
        (inside, barrier)
    }
}

/// Builds and normalises the even wavefunction of `state`.
///
/// Fails with [`Error::ContinuityViolation`] when `psi'` jumps at the well
/// edge, i.e. when `state` is not an even bound state.
pub fn symmetric_wavefunction(state: &BoundState, geometry: &WellGeometry) -> Result<SymmetricWavefunction> {
    geometry.validate()?;
    let (k, kappa) = (state.k, state.kappa);
    let (even, _) = geometry.parity_factors(k, kappa);
    let mismatch = even.abs() / (k + kappa);
    if mismatch.is_nan() || mismatch > CONTINUITY_TOLERANCE {
        return Err(Error::ContinuityViolation { mismatch, tolerance: CONTINUITY_TOLERANCE });
    }
    let (width, l) = (geometry.width, geometry.circumference);
    let mut psi = SymmetricWavefunction {
        k,
        kappa,
        width,
        circumference: l,
        amplitude: 1.0,
        barrier_prefactor: (0.5 * k * width).cos() / ((kappa * (width - l)).exp() + 1.0),
    };
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-14, max_depth: 40 };
    let norm = integrate_panels(|x| psi.eval(x).powi(2), &psi.breakpoints(), &opts)?;
    psi.amplitude = 1.0 / norm.value.sqrt();
    Ok(psi)
}
