use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use proptest::prelude::*;

use polyring::circulant::root_of_unity;
use polyring::correspondence::rotated_offdiagonals;
use polyring::quantum_well::{expanded_condition, wavenumbers};
use polyring::{
    build_basis, build_transform_matrix, centroid, circulant_eigenvalues, compute_c0, decompose, determinant_condition,
    dominance_thresholds, dominant_index, eigenpolygon, eigenvalues_eta, find_bound_states, fourier_eigenvectors,
    ground_state, iterate_to_eigenshape, rotation_params, solve_generalized_circulant, solve_ring,
    symmetric_wavefunction, target_entries, theta_from_diagonal, AssemblyOptions, CirculantMatrix, Complex64, Error,
    IterationOptions, Parity, Polygon, SearchOptions, SolverPath, TransformParams, WellGeometry,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn theta_strategy() -> impl Strategy<Value = f64> {
    (0.001..FRAC_PI_2 - 0.001).prop_filter("tan overflow", |t| t.tan() < 500.0)
}

fn polygon_strategy() -> impl Strategy<Value = Polygon> {
    (3usize..=16).prop_flat_map(|n| {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
            .prop_map(|v| Polygon::new(v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    })
}

/// Hermitian circulant with the prescribed spectrum `lambda_j`.
fn circulant_from_spectrum(spectrum: &[f64]) -> CirculantMatrix {
    let n = spectrum.len();
    let row = (0..n)
        .map(|m| {
            spectrum.iter().enumerate().map(|(j, &l)| root_of_unity(j * m, n).conj() * l).sum::<Complex64>() / n as f64
        })
        .collect();
    CirculantMatrix::new(row).unwrap()
}

fn brute_force_pencil(h: &DMatrix<Complex64>, s: &DMatrix<Complex64>) -> Vec<f64> {
    let l = Cholesky::new(s.clone()).unwrap().l();
    let l_inv = l.try_inverse().unwrap();
    let reduced = &l_inv * h * l_inv.adjoint();
    let reduced = (&reduced + reduced.adjoint()) * c(0.5, 0.0);
    let mut e: Vec<f64> = SymmetricEigen::new(reduced).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_is_exactly_hermitian(theta in theta_strategy(), lambda in 0.001..0.999f64, n in 3usize..=16) {
        let m = build_transform_matrix(&TransformParams::new(theta, lambda).unwrap(), n).unwrap().to_dense();
        prop_assert_eq!(m.adjoint(), m);
    }

    #[test]
    fn rows_sum_to_one_and_fix_the_centroid(theta in theta_strategy(), lambda in 0.001..0.999f64, z in polygon_strategy()) {
        let n = z.len();
        let m = build_transform_matrix(&TransformParams::new(theta, lambda).unwrap(), n).unwrap();
        let scale = m.first_row().iter().map(|x| x.norm()).sum::<f64>();
        for mu in 0..n {
            let row: Complex64 = (0..n).map(|nu| m.entry(mu, nu)).sum();
            prop_assert!((row - 1.0).norm() < 1e-14 * scale.max(1.0));
        }
        let mz = Polygon::new(m.apply(z.vertices()).unwrap()).unwrap();
        prop_assert!((centroid(&mz) - centroid(&z)).norm() < 1e-12 * scale.max(1.0));
    }

    #[test]
    fn eigenpolygons_are_eigenvectors_with_positive_eta(theta in theta_strategy(), lambda in 0.001..0.999f64, n in 3usize..=16) {
        let p = TransformParams::new(theta, lambda).unwrap();
        let m = build_transform_matrix(&p, n).unwrap();
        let eta = eigenvalues_eta(&p, n).unwrap();
        for (k, &e) in eta.iter().enumerate() {
            prop_assert!(e > 0.0);
            let f = eigenpolygon(n, k);
            let mf = m.apply(&f).unwrap();
            for (a, b) in mf.iter().zip(&f) {
                prop_assert!((a - b * e).norm() < 1e-10 * e.max(1.0));
            }
        }
    }

    #[test]
    fn interval_dominance_matches_argmax(n in 3usize..=12, theta in 0.001..FRAC_PI_2 - 0.001) {
        prop_assume!(dominance_thresholds(n).iter().all(|t| (theta - t).abs() >= 1e-3));
        let p = TransformParams::new(theta, 0.5).unwrap();
        let eta = eigenvalues_eta(&p, n).unwrap();
        let argmax = (0..n).max_by(|&a, &b| eta[a].total_cmp(&eta[b])).unwrap();
        prop_assert_eq!(dominant_index(&p, n).unwrap().index, argmax);
    }

    #[test]
    fn decomposition_is_lossless(z in polygon_strategy()) {
        let d = decompose(&z);
        prop_assert!(d.residual(&z) < 1e-12);
        let energy: f64 = d.coefficients.iter().map(|x| x.norm_sqr()).sum();
        prop_assert!((energy - z.norm().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn iteration_reaches_the_dominant_eigenpolygon(seed in any::<u64>(), n in 3usize..=8, theta in 0.05..1.5f64) {
        prop_assume!(dominance_thresholds(n).iter().all(|t| (theta - t).abs() >= 0.05));
        let p = TransformParams::new(theta, 0.5).unwrap();
        let z = Polygon::random(n, seed).unwrap();
        let (_, report) = iterate_to_eigenshape(&z, &p, &IterationOptions::default()).unwrap();
        prop_assert!(report.converged);
        prop_assert!(report.dominant_mass > 1.0 - 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_vectors_diagonalise_any_circulant(row in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..=12)) {
        let m = CirculantMatrix::new(row.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap();
        let n = m.len();
        let dense = m.to_dense();
        let lambdas = m.eigenvalues();
        let v = fourier_eigenvectors(n);
        for (j, &lambda) in lambdas.iter().enumerate() {
            let col = v.column(j).into_owned();
            prop_assert!((&dense * &col - &col * lambda).camax() < 1e-10);
        }
    }

    #[test]
    fn generalized_circulant_solution(
        spectra in (2usize..=12).prop_flat_map(|n| (
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(0.1..5.0f64, n),
        ))
    ) {
        let (hs, ss) = spectra;
        let n = hs.len();
        let h = circulant_from_spectrum(&hs);
        let s = circulant_from_spectrum(&ss);
        let sol = solve_generalized_circulant(&h, &s).unwrap();
        let (hd, sd) = (h.to_dense(), s.to_dense());
        prop_assert!(sol.orthonormality_error(&sd) < 1e-10);
        let d = sol.phi.adjoint() * &hd * &sol.phi;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    prop_assert!(d[(i, j)].norm() < 1e-10);
                }
            }
        }
        let oracle = brute_force_pencil(&hd, &sd);
        for (a, b) in sol.sorted_eigenvalues().iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn symmetric_real_circulants_have_real_spectra(row in prop::collection::vec(-5.0..5.0f64, 3..=12)) {
        let n = row.len();
        let mut first = vec![c(0.0, 0.0); n];
        for m in 0..n {
            let v = 0.5 * (row[m] + row[(n - m) % n]);
            first[m] = c(v, 0.0);
        }
        let m = CirculantMatrix::new(first).unwrap();
        prop_assert!(circulant_eigenvalues(&m).iter().all(|l| l.im == 0.0));
    }
}

fn geometry_strategy() -> impl Strategy<Value = WellGeometry> {
    (0.5..3.0f64, 50.0..1000.0f64, 2.0..10.0f64)
        .prop_map(|(width, depth, ratio)| WellGeometry::new(width, ratio * width, depth).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bound_states_sit_on_the_energy_circle(g in geometry_strategy()) {
        let c0 = compute_c0(&g).unwrap();
        let states = find_bound_states(&g, &SearchOptions::default()).unwrap();
        prop_assert!(!states.is_empty());
        for s in &states {
            let (k, kappa) = wavenumbers(s.energy, &g).unwrap();
            prop_assert!(((k * k + kappa * kappa) / c0 - 1.0).abs() < 1e-9);
            prop_assert!(s.energy > -g.depth && s.energy < 0.0);
        }
    }

    #[test]
    fn both_determinant_forms_share_signs(g in geometry_strategy()) {
        let states = find_bound_states(&g, &SearchOptions::default()).unwrap();
        for i in 1..400 {
            let w = -g.depth + g.depth * i as f64 / 400.0;
            if states.iter().any(|s| (s.energy - w).abs() < 1e-6) {
                continue;
            }
            let a = determinant_condition(w, &g).unwrap();
            let b = expanded_condition(w, &g).unwrap();
            prop_assert_eq!(a.signum(), b.signum(), "W = {}", w);
        }
    }

    #[test]
    fn shifted_well_translates_energies(g in geometry_strategy(), shift in 0.0..2000.0f64) {
        let search = SearchOptions::default();
        let plain = find_bound_states(&g, &search).unwrap();
        let moved = find_bound_states(&g.with_shift(shift).unwrap(), &search).unwrap();
        prop_assert_eq!(plain.len(), moved.len());
        for (a, b) in plain.iter().zip(&moved) {
            prop_assert!((b.energy - a.energy - shift).abs() < 1e-10);
            prop_assert_eq!((a.k, a.kappa), (b.k, b.kappa));
        }
    }

    #[test]
    fn symmetric_wavefunction_is_smooth_at_junctions(g in geometry_strategy()) {
        let s = ground_state(&g, &SearchOptions::default()).unwrap().unwrap();
        prop_assert_eq!(s.parity, Parity::Even);
        let psi = symmetric_wavefunction(&s, &g).unwrap();
        let (vi, vb) = psi.edge_values();
        let (di, db) = psi.edge_derivatives();
        let scale = psi.amplitude() * (s.k + s.kappa);
        prop_assert!((vi - vb).abs() < 1e-8 * psi.amplitude());
        prop_assert!((di - db).abs() < 1e-8 * scale);
    }

    #[test]
    fn ground_state_approaches_isolated_limit_monotonically(width in 0.5..2.0f64, depth in 100.0..800.0f64) {
        let search = SearchOptions::default();
        let energies: Vec<f64> = [1.5, 2.0, 3.0, 5.0]
            .iter()
            .map(|r| ground_state(&WellGeometry::new(width, r * width, depth).unwrap(), &search).unwrap().unwrap().energy)
            .collect();
        // Closer periodic images lower the symmetric level.
        for p in energies.windows(2) {
            prop_assert!(p[0] <= p[1] + 1e-9);
        }
    }
}

#[test]
fn ring_levels_pair_up() {
    for n in [4, 5, 6, 7] {
        let g = WellGeometry::for_ring(1.0, 2.0, n, 400.0).unwrap();
        let basis = build_basis(&g, n, &SearchOptions::default()).unwrap();
        let m = polyring::assemble_matrices(&basis, &AssemblyOptions::default()).unwrap();
        let sol = solve_ring(&m).unwrap();
        assert_eq!(sol.path, SolverPath::Circulant);
        assert!(sol.residual < 1e-8);
        for j in 1..n {
            assert!((sol.energies[j] - sol.energies[n - j]).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn theta_round_trips(theta in theta_strategy(), lambda in 0.01..0.99f64) {
        let w1 = target_entries(theta, lambda).unwrap().w1;
        let back = theta_from_diagonal(w1, lambda).unwrap();
        prop_assert!((back - theta).abs() < 1e-10);
    }

    #[test]
    fn rotation_closes_onto_w2(
        theta in 0.01..1.5f64,
        lambda in 0.01..0.99f64,
        h11 in prop_oneof![-1e3..-1e-2f64, 1e-2..1e3f64],
        h12 in prop_oneof![-1e2..-1e-2f64, 1e-2..1e2f64],
    ) {
        let w2 = target_entries(theta, lambda).unwrap().w2;
        match rotation_params(w2, h11, h12) {
            Ok(r) => {
                let (h12p, h21p) = rotated_offdiagonals(&r, [[h11, h12], [h12, h11]]);
                prop_assert!((h21p - w2).norm() < 1e-10 * w2.norm().max(1.0));
                prop_assert_eq!(h12p, h21p.conj());
            }
            Err(e) => {
                let expected = matches!(e, Error::DegenerateRotation | Error::NoRealSolution { .. });
                prop_assert!(expected, "unexpected error {}", e);
            }
        }
    }

    #[test]
    fn rotated_blocks_stay_hermitian(alpha in -5.0..5.0f64, beta in -5.0..5.0f64, h11 in -10.0..10.0f64, h12 in -10.0..10.0f64) {
        let r = polyring::Rotation { alpha, beta };
        let (a, b) = rotated_offdiagonals(&r, [[h11, h12], [h12, h11]]);
        prop_assert_eq!(a, b.conj());
    }

    #[test]
    fn transform_entries_follow_the_targets(theta in theta_strategy(), lambda in 0.001..0.999f64, n in 3usize..=9) {
        let t = target_entries(theta, lambda).unwrap();
        let m = build_transform_matrix(&TransformParams::new(theta, lambda).unwrap(), n).unwrap();
        let tol = 1e-12 * t.w1.max(1.0);
        for mu in 0..n {
            prop_assert!((m.entry(mu, mu).re - t.w1).abs() < tol);
            prop_assert!((m.entry((mu + 1) % n, mu) - t.w2).norm() < tol);
            prop_assert!((m.entry(mu, (mu + 1) % n) - t.w2.conj()).norm() < tol);
        }
    }
}

#[test]
fn pentagon_thresholds() {
    let t = dominance_thresholds(5);
    assert!((t[0] - PI / 10.0).abs() < 1e-15 && (t[1] - 3.0 * PI / 10.0).abs() < 1e-15);
}
