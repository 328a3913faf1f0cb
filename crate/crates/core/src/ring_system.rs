//! Ring of identical, equidistant quantum wells.
//!
//! The basis is the lowest even single-well state translated to each site,
//! `psi_nu(x) = psi(x - nu a)` on a circle of length `l = n a`. With overlap
//! `S[mu][nu] = <psi_mu | psi_nu>` and `H[mu][nu] = <psi_mu | H psi_nu>` the
//! ring's states solve the pencil `H a = E S a`.
//!
//! `H psi_nu` is evaluated through the single-well eigen-relation: the ring
//! potential equals well `nu`'s own potential plus `-V0` inside every other
//! well, so `H psi_nu = W psi_nu - V0 sum_{rho != nu} chi_rho psi_nu`, with
//! `chi_rho` the indicator of well `rho`. No second derivatives are taken.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circulant::{solve_generalized_circulant, CirculantMatrix};
use crate::dense::generalized_eigen_dense;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_panels, QuadOptions};
use crate::quantum_well::{
    ground_state, symmetric_wavefunction, BoundState, SearchOptions, SymmetricWavefunction, WellGeometry,
};

/// Largest entry deviation from cyclic symmetry that still counts as circulant.
pub const CIRCULANT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RingBasis {
    wells: usize,
    spacing: f64,
    geometry: WellGeometry,
    state: BoundState,
    psi: SymmetricWavefunction,
}

impl RingBasis {
    pub fn wells(&self) -> usize {
        self.wells
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn geometry(&self) -> &WellGeometry {
        &self.geometry
    }

    /// The single-well state every basis function is a translate of.
    pub fn state(&self) -> &BoundState {
        &self.state
    }

    pub fn wavefunction(&self) -> &SymmetricWavefunction {
        &self.psi
    }

    pub fn center(&self, nu: usize) -> f64 {
        nu as f64 * self.spacing
    }

    /// `psi_nu(x)`, periodic in `l`.
    pub fn eval(&self, nu: usize, x: f64) -> f64 {
        self.psi.eval(x - self.center(nu))
    }

    /// Indicator of well `rho` on the circle.
    pub fn in_well(&self, rho: usize, x: f64) -> bool {
        let l = self.geometry.circumference;
        let d = (x - self.center(rho)).rem_euclid(l);
        let half = 0.5 * self.geometry.width;
        d < half || d > l - half
    }

    /// Total potential (meV) of the ring at `x`.
    pub fn potential(&self, x: f64) -> f64 {
        let inside = (0..self.wells).any(|rho| self.in_well(rho, x));
        self.geometry.shift - if inside { self.geometry.depth } else { 0.0 }
    }

    /// Every well edge on `[0, l]`, plus both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let l = self.geometry.circumference;
        let half = 0.5 * self.geometry.width;
        let mut points = vec![0.0, l];
        for nu in 0..self.wells {
            let c = self.center(nu);
            for edge in [c - half, c + half] {
                let e = edge.rem_euclid(l);
                if e > 0.0 && e < l {
                    points.push(e);
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }
}

/// Basis of `wells` translated copies of the lowest even state of `geometry`,
/// whose circumference is split into `wells` equal cells.
pub fn build_basis(geometry: &WellGeometry, wells: usize, search: &SearchOptions) -> Result<RingBasis> {
    geometry.validate()?;
    if wells < 3 {
        return Err(Error::InvalidSize { got: wells, min: 3 });
    }
    let spacing = geometry.circumference / wells as f64;
    if geometry.width >= spacing {
        return Err(Error::Domain {
            name: "width",
            value: geometry.width,
            expected: "smaller than the well spacing l / n",
        });
    }
    let state = ground_state(geometry, search)?.ok_or(Error::EmptyBasis)?;
    let psi = symmetric_wavefunction(&state, geometry)?;
    Ok(RingBasis { wells, spacing, geometry: *geometry, state, psi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Zero all couplings beyond adjacent wells.
    pub truncate_nearest_neighbor: bool,
    /// Absolute tolerance per matrix entry.
    pub abs_tol: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { truncate_nearest_neighbor: false, abs_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub max_dropped_overlap: f64,
    pub max_dropped_hamiltonian: f64,
}

#[derive(Debug, Clone)]
pub struct RingMatrices {
    /// Hamiltonian matrix (meV).
    pub h: DMatrix<Complex64>,
    /// Overlap matrix.
    pub s: DMatrix<Complex64>,
    /// Sum of quadrature error estimates over all entries.
    pub quadrature_error: f64,
    /// Present when nearest-neighbour truncation was applied.
    pub truncation: Option<TruncationReport>,
}

impl RingMatrices {
    pub fn size(&self) -> usize {
        self.h.nrows()
    }

    pub fn hermitian_deviation(&self) -> (f64, f64) {
        ((&self.h - self.h.adjoint()).camax(), (&self.s - self.s.adjoint()).camax())
    }

    /// Largest deviation of `(H, S)` entries from cyclic symmetry.
    pub fn circulant_deviation(&self) -> f64 {
        circulant_deviation(&self.h).max(circulant_deviation(&self.s))
    }
}

pub fn circulant_deviation(m: &DMatrix<Complex64>) -> f64 {
    CirculantMatrix::from_dense(m).map(|(_, d)| d).unwrap_or(f64::INFINITY)
}

fn is_nearest_neighbor(mu: usize, nu: usize, n: usize) -> bool {
    let d = (nu + n - mu) % n;
    d == 0 || d == 1 || d == n - 1
}

pub fn assemble_matrices(basis: &RingBasis, options: &AssemblyOptions) -> Result<RingMatrices> {
    let n = basis.wells;
    let breakpoints = basis.breakpoints();
    let quad = QuadOptions { abs_tol: options.abs_tol / (n as f64 * 10.0), rel_tol: 1e-14, max_depth: 40 };
    let half = 0.5 * basis.geometry.width;
    let (energy, depth) = (basis.state.energy, basis.geometry.depth);

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|mu| (0..n).map(move |nu| (mu, nu))).collect();
    let entries: Vec<(f64, f64, f64)> = pairs
        .par_iter()
        .map(|&(mu, nu)| -> Result<(f64, f64, f64)> {
            let product = |x: f64| basis.eval(mu, x) * basis.eval(nu, x);
            let overlap = integrate_panels(product, &breakpoints, &quad)?;
            let mut residual = 0.0;
            let mut error = overlap.error;
            for rho in (0..n).filter(|&rho| rho != nu) {
                let c = basis.center(rho);
                let r = integrate(product, c - half, c + half, &quad)?;
                residual += r.value;
                error += r.error;
            }
            Ok((overlap.value, energy * overlap.value - depth * residual, error))
        })
        .collect::<Result<_>>()?;

    let mut s = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    let mut quadrature_error = 0.0;
    for (&(mu, nu), &(sv, hv, err)) in pairs.iter().zip(&entries) {
        s[(mu, nu)] = Complex64::new(sv, 0.0);
        h[(mu, nu)] = Complex64::new(hv, 0.0);
        quadrature_error += err;
    }

    let truncation = options.truncate_nearest_neighbor.then(|| {
        let mut report = TruncationReport { max_dropped_overlap: 0.0, max_dropped_hamiltonian: 0.0 };
        for (mu, nu) in pairs.iter().copied().filter(|&(mu, nu)| !is_nearest_neighbor(mu, nu, n)) {
            report.max_dropped_overlap = report.max_dropped_overlap.max(s[(mu, nu)].norm());
            report.max_dropped_hamiltonian = report.max_dropped_hamiltonian.max(h[(mu, nu)].norm());
            s[(mu, nu)] = Complex64::new(0.0, 0.0);
            h[(mu, nu)] = Complex64::new(0.0, 0.0);
        }
        report
    });

    Ok(RingMatrices { h, s, quadrature_error, truncation })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverPath {
    /// Fourier closed form; energies are in Fourier order `j = 0..n`.
    Circulant,
    /// Dense whitening; energies ascend.
    Dense,
}

#[derive(Debug, Clone)]
pub struct RingSolution {
    pub energies: Vec<f64>,
    /// Superposition coefficients `a`, one column per energy.
    pub coefficients: DMatrix<Complex64>,
    pub path: SolverPath,
    /// Largest gap between the sorted spectra of both solvers, when both ran.
    pub dual_solver_gap: Option<f64>,
    /// `max |H a - E S a|` over all returned pairs.
    pub residual: f64,
}

impl RingSolution {
    pub fn sorted_energies(&self) -> Vec<f64> {
        let mut e = self.energies.clone();
        e.sort_by(f64::total_cmp);
        e
    }
}

/// Solves `H a = E S a`, through the circulant closed form when the matrices
/// are circulant and by dense whitening otherwise. The dense solver always
/// runs, so circulant solutions come with a cross-check.
pub fn solve_ring(matrices: &RingMatrices) -> Result<RingSolution> {
    let dense = generalized_eigen_dense(&matrices.h, &matrices.s)?;
    let solution = if matrices.circulant_deviation() <= CIRCULANT_TOLERANCE {
        let (h, _) = CirculantMatrix::from_dense(&matrices.h)?;
        let (s, _) = CirculantMatrix::from_dense(&matrices.s)?;
        let circ = solve_generalized_circulant(&h, &s)?;
        let gap = circ.sorted_eigenvalues().iter().zip(&dense.lambda).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        RingSolution {
            energies: circ.lambda.clone(),
            residual: circ.residual(&matrices.h, &matrices.s),
            coefficients: circ.phi,
            path: SolverPath::Circulant,
            dual_solver_gap: Some(gap),
        }
    } else {
        RingSolution {
            residual: dense.residual(&matrices.h, &matrices.s),
            energies: dense.lambda.clone(),
            coefficients: dense.phi.clone(),
            path: SolverPath::Dense,
            dual_solver_gap: None,
        }
    };
    Ok(solution)
}
