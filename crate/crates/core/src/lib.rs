//! Eigenpolygons of circulant Hermitian polygon transformations and the
//! matching tight-binding model of a ring of identical quantum wells.
//!
//! - [`polygon_transform`]: the matrix `M(theta, lambda)`, its spectrum,
//!   eigenpolygon decomposition and power iteration.
//! - [`circulant`]: circulant algebra and the generalized circulant
//!   eigenproblem `H c = lambda S c`.
//! - [`quantum_well`]: bound states of a finite square well on a ring.
//! - [`ring_system`]: overlap and Hamiltonian matrices of `n` wells and their
//!   eigenstates.
//! - [`correspondence`]: the shift and basis rotation mapping one onto the other.

pub mod circulant;
pub mod correspondence;
pub mod dense;
pub mod error;
pub mod polygon_transform;
pub mod quadrature;
pub mod quantum_well;
pub mod ring_system;
pub mod serde_complex;

pub use nalgebra::DMatrix;
pub use num_complex::Complex64;

pub use circulant::{
    circulant_eigenvalues, fourier_eigenvectors, root_of_unity, solve_generalized_circulant, CirculantMatrix,
    GeneralizedEigenSolution,
};
pub use correspondence::{
    correspond, full_correspondence, rotation_params, shift_t, target_entries, theta_from_diagonal,
    CorrespondenceResult, Rotation, TargetEntries,
};
pub use error::{Error, Result};
pub use polygon_transform::{
    build_transform_matrix, centroid, decompose, dominance_thresholds, dominant_index, eigenpolygon, eigenvalues_eta,
    iterate_to_eigenshape, ConvergenceReport, Dominance, DominanceMethod, EigenpolygonDecomposition, IterationOptions,
    Polygon, TransformParams,
};
pub use quantum_well::{
    compute_c0, determinant_condition, find_bound_states, ground_state, symmetric_wavefunction, BoundState, Parity,
    SearchOptions, SymmetricWavefunction, WellGeometry,
};
pub use ring_system::{
    assemble_matrices, build_basis, solve_ring, AssemblyOptions, RingBasis, RingMatrices, RingSolution, SolverPath,
};
