use std::collections::BTreeMap;
use std::path::Path;

use polyring::circulant::OVERLAP_FLOOR;
use polyring::correspondence::COUPLING_FLOOR;
use polyring::polygon_transform::THRESHOLD_TOLERANCE;
use polyring::quantum_well::{compute_c0, CONTINUITY_TOLERANCE};
use polyring::ring_system::CIRCULANT_TOLERANCE;
use polyring::{
    assemble_matrices, build_basis, correspond, decompose, dominance_thresholds, dominant_index, eigenvalues_eta,
    find_bound_states, full_correspondence, iterate_to_eigenshape, solve_ring, symmetric_wavefunction, target_entries,
    AssemblyOptions, Complex64, Dominance, Error, Parity, Polygon, RingMatrices, RingSolution, SearchOptions,
    TransformParams,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    Command, MapConfig, MapSource, PolygonAction, PolygonConfig, PolygonSource, RingConfig, RingGeometry, SweepConfig,
    WellConfig,
};
use crate::error::CliError;
use crate::input::read_polygon_file;
use crate::output::{num, Cx, Meta, Report, Table};

pub const WORKERS_ENV: &str = "POLYRING_WORKERS";

pub fn execute(command: &Command, out_dir: Option<&Path>) -> Result<Report, CliError> {
    command.validate()?;
    match command {
        Command::Polygon(c) => polygon(c),
        Command::Well(c) => well(c),
        Command::Ring(c) => ring(c),
        Command::Map(c) => map(c),
        Command::Sweep(c) => sweep(command, c, out_dir),
    }
}

fn cx_list(v: &[Complex64]) -> Vec<Cx> {
    v.iter().copied().map(Cx::from).collect()
}

fn load_polygon(source: &PolygonSource) -> Result<Polygon, CliError> {
    let from_pairs = |v: &[[f64; 2]]| Polygon::new(v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect());
    Ok(match source {
        PolygonSource::Random { n, seed } => Polygon::random(*n, *seed)?,
        PolygonSource::Regular { n } => Polygon::regular(*n)?,
        PolygonSource::Vertices { vertices } => from_pairs(vertices)?,
        PolygonSource::File { path } => from_pairs(&read_polygon_file(path)?)?,
    })
}

/// Dominant index, or `None` when `theta` sits on a threshold.
fn try_dominance(params: &TransformParams, n: usize) -> Result<Option<Dominance>, CliError> {
    match dominant_index(params, n) {
        Ok(d) => Ok(Some(d)),
        Err(Error::AmbiguousDominance { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn polygon(c: &PolygonConfig) -> Result<Report, CliError> {
    let z = load_polygon(&c.source)?;
    let n = z.len();
    let params = TransformParams::new(c.theta, c.lambda)?;
    let eta = eigenvalues_eta(&params, n)?;
    let mut tolerances = BTreeMap::from([("dominance_threshold", THRESHOLD_TOLERANCE)]);

    match c.action {
        PolygonAction::Decompose => {
            let dominant = try_dominance(&params, n)?;
            let d = decompose(&z);
            let residual = d.residual(&z);
            let mut table = Table::new("decomposition", &["k", "re", "im", "abs", "eta", "dominant"]);
            let mut rows = Vec::new();
            for (k, coef) in d.coefficients.iter().enumerate() {
                let is_dominant = dominant.map(|d| d.index) == Some(k);
                table.push(vec![
                    k.to_string(),
                    num(coef.re),
                    num(coef.im),
                    num(coef.norm()),
                    num(eta[k]),
                    is_dominant.to_string(),
                ]);
                rows.push(
                    json!({"k": k, "c": Cx::from(*coef), "abs": coef.norm(), "eta": eta[k], "dominant": is_dominant}),
                );
            }
            Ok(Report {
                result: json!({
                    "n": n,
                    "vertices": cx_list(z.vertices()),
                    "dominant": dominant,
                    "reconstruction_residual": residual,
                    "coefficients": rows,
                }),
                tables: vec![table],
                tolerances,
                notes: vec![("reconstruction_residual".into(), num(residual))],
            })
        }
        PolygonAction::Eigen => {
            let dominant = try_dominance(&params, n)?;
            let mut table = Table::new("eigenvalues", &["k", "eta", "dominant"]);
            for (k, e) in eta.iter().enumerate() {
                table.push(vec![k.to_string(), num(*e), (dominant.map(|d| d.index) == Some(k)).to_string()]);
            }
            let thresholds = params.is_half().then(|| dominance_thresholds(n));
            Ok(Report {
                result: json!({"n": n, "eta": eta, "dominant": dominant, "thresholds": thresholds}),
                tables: vec![table],
                tolerances,
                notes: vec![],
            })
        }
        PolygonAction::Iterate { .. } => {
            let options = c.action.iteration();
            tolerances.insert("tol", options.tol);
            tolerances.insert("max_steps", options.max_steps as f64);
            let (limit, report) = iterate_to_eigenshape(&z, &params, &options)?;
            let mut trace = Table::new("trace", &["step", "residual"]);
            for (i, r) in report.residuals.iter().enumerate() {
                trace.push(vec![(i + 1).to_string(), num(*r)]);
            }
            let mut shape = Table::new("limit", &["mu", "re", "im"]);
            for (mu, v) in limit.vertices().iter().enumerate() {
                shape.push(vec![mu.to_string(), num(v.re), num(v.im)]);
            }
            let notes =
                vec![("steps".into(), report.steps.to_string()), ("dominant_mass".into(), num(report.dominant_mass))];
            Ok(Report {
                result: json!({"n": n, "report": report, "limit": cx_list(limit.vertices())}),
                tables: vec![trace, shape],
                tolerances,
                notes,
            })
        }
    }
}

fn well(c: &WellConfig) -> Result<Report, CliError> {
    let g = c.geometry()?;
    let search = c.search();
    let states = find_bound_states(&g, &search)?;
    let mut table = Table::new("states", &["index", "energy", "k", "kappa", "parity", "amplitude"]);
    for (i, s) in states.iter().enumerate() {
        let parity = match s.parity {
            Parity::Even => "even",
            Parity::Odd => "odd",
        };
        table.push(vec![
            i.to_string(),
            num(s.energy),
            num(s.k),
            num(s.kappa),
            parity.into(),
            s.amplitude.map(num).unwrap_or_default(),
        ]);
    }
    let mut tables = vec![table];
    let mut psi_rows = Vec::new();
    if let (Some(samples), Some(ground)) = (c.psi_samples, states.iter().find(|s| s.parity == Parity::Even)) {
        let psi = symmetric_wavefunction(ground, &g)?;
        let mut t = Table::new("psi", &["x", "psi"]);
        for i in 0..samples {
            let x = g.circumference * i as f64 / samples as f64;
            let y = psi.eval(x);
            t.push(vec![num(x), num(y)]);
            psi_rows.push([x, y]);
        }
        tables.push(t);
    }
    let mut notes = vec![("bound_states".into(), states.len().to_string())];
    let note = states.is_empty().then_some("no bound states");
    if let Some(n) = note {
        notes.push(("note".into(), n.into()));
    }
    let (lo, hi) = g.window();
    Ok(Report {
        result: json!({
            "window": [lo, hi],
            "c0": compute_c0(&g)?,
            "states": states,
            "note": note,
            "psi": (!psi_rows.is_empty()).then_some(psi_rows),
        }),
        tables,
        tolerances: BTreeMap::from([
            ("energy_tol", search.energy_tol),
            ("grid_points", search.grid_points as f64),
            ("refine_factor", search.refine_factor as f64),
            ("continuity", CONTINUITY_TOLERANCE),
        ]),
        notes,
    })
}

fn ring_matrices(g: &RingGeometry, truncate: bool) -> Result<(polyring::RingBasis, RingMatrices), CliError> {
    let basis = build_basis(&g.well()?, g.n, &SearchOptions::default())?;
    let options = AssemblyOptions { truncate_nearest_neighbor: truncate, ..AssemblyOptions::default() };
    let m = assemble_matrices(&basis, &options)?;
    Ok((basis, m))
}

fn matrix_table(name: &str, m: &polyring::DMatrix<Complex64>) -> Table {
    let mut t = Table::new(name, &["mu", "nu", "re", "im"]);
    for mu in 0..m.nrows() {
        for nu in 0..m.ncols() {
            let z = m[(mu, nu)];
            t.push(vec![mu.to_string(), nu.to_string(), num(z.re), num(z.im)]);
        }
    }
    t
}

fn matrix_json(m: &polyring::DMatrix<Complex64>) -> Vec<Vec<Cx>> {
    m.row_iter().map(|r| r.iter().copied().map(Cx::from).collect()).collect()
}

/// Per-level gap between two solutions, matched in Fourier order when both
/// are circulant and by rank otherwise.
fn level_gaps(a: &RingSolution, b: &RingSolution) -> Vec<f64> {
    if a.path == b.path && a.path == polyring::SolverPath::Circulant {
        a.energies.iter().zip(&b.energies).map(|(x, y)| (x - y).abs()).collect()
    } else {
        let mut order: Vec<usize> = (0..a.energies.len()).collect();
        order.sort_by(|&i, &j| a.energies[i].total_cmp(&a.energies[j]));
        let sorted_b = b.sorted_energies();
        let mut gaps = vec![0.0; a.energies.len()];
        for (rank, &i) in order.iter().enumerate() {
            gaps[i] = (a.energies[i] - sorted_b[rank]).abs();
        }
        gaps
    }
}

fn ring(c: &RingConfig) -> Result<Report, CliError> {
    let (basis, m) = ring_matrices(&c.geometry, c.truncate_nn)?;
    let sol = solve_ring(&m)?;
    let gaps = if c.truncate_nn {
        let (_, full) = ring_matrices(&c.geometry, false)?;
        Some(level_gaps(&sol, &solve_ring(&full)?))
    } else {
        None
    };

    let mut headers = vec!["j", "energy"];
    if gaps.is_some() {
        headers.push("truncation_error");
    }
    let mut energies = Table::new("energies", &headers);
    for (j, e) in sol.energies.iter().enumerate() {
        let mut row = vec![j.to_string(), num(*e)];
        if let Some(g) = &gaps {
            row.push(num(g[j]));
        }
        energies.push(row);
    }
    let mut coefficients = Table::new("coefficients", &["j", "mu", "re", "im"]);
    for j in 0..sol.coefficients.ncols() {
        for mu in 0..sol.coefficients.nrows() {
            let z = sol.coefficients[(mu, j)];
            coefficients.push(vec![j.to_string(), mu.to_string(), num(z.re), num(z.im)]);
        }
    }
    let columns: Vec<Vec<Cx>> =
        sol.coefficients.column_iter().map(|col| col.iter().copied().map(Cx::from).collect()).collect();
    let (dev_h, dev_s) = m.hermitian_deviation();
    let notes = vec![
        ("path".into(), format!("{:?}", sol.path).to_lowercase()),
        ("residual".into(), num(sol.residual)),
        ("dual_solver_gap".into(), sol.dual_solver_gap.map(num).unwrap_or_default()),
    ];
    Ok(Report {
        result: json!({
            "n": basis.wells(),
            "spacing": basis.spacing(),
            "circumference": basis.geometry().circumference,
            "single_well": basis.state(),
            "path": sol.path,
            "energies": sol.energies,
            "residual": sol.residual,
            "dual_solver_gap": sol.dual_solver_gap,
            "quadrature_error": m.quadrature_error,
            "circulant_deviation": m.circulant_deviation(),
            "hermitian_deviation": {"h": dev_h, "s": dev_s},
            "truncation": m.truncation,
            "truncation_error": gaps,
            "coefficients": columns,
            "s": matrix_json(&m.s),
            "h": matrix_json(&m.h),
        }),
        tables: vec![energies, matrix_table("overlap", &m.s), matrix_table("hamiltonian", &m.h), coefficients],
        tolerances: BTreeMap::from([
            ("quadrature_abs_tol", AssemblyOptions::default().abs_tol),
            ("circulant", CIRCULANT_TOLERANCE),
            ("overlap_floor", OVERLAP_FLOOR),
        ]),
        notes,
    })
}

fn map(c: &MapConfig) -> Result<Report, CliError> {
    let mut table = Table::new("map", &["quantity", "re", "im"]);
    let tolerances = BTreeMap::from([("coupling_floor", COUPLING_FLOOR)]);
    let result = match c.source {
        MapSource::WOnly => {
            let t = target_entries(c.theta, c.lambda)?;
            table.push(vec!["w1".into(), num(t.w1), num(0.0)]);
            table.push(vec!["w2".into(), num(t.w2.re), num(t.w2.im)]);
            serde_json::to_value(t)?
        }
        MapSource::Raw { h11, h12 } => {
            let r = correspond(c.theta, c.lambda, h11, h12)?;
            fill_map_table(&mut table, &r);
            serde_json::to_value(r)?
        }
        MapSource::Ring(g) => {
            let (_, m) = ring_matrices(&g, true)?;
            let r = full_correspondence(c.theta, c.lambda, &m)?;
            fill_map_table(&mut table, &r);
            serde_json::to_value(r)?
        }
    };
    let notes = result
        .get("warning")
        .and_then(Value::as_str)
        .map(|w| vec![("warning".to_string(), w.to_string())])
        .unwrap_or_default();
    Ok(Report { result, tables: vec![table], tolerances, notes })
}

fn fill_map_table(table: &mut Table, r: &polyring::CorrespondenceResult) {
    let real = |name: &str, x: f64| vec![name.to_string(), num(x), num(0.0)];
    let complex = |name: &str, z: Complex64| vec![name.to_string(), num(z.re), num(z.im)];
    table.push(real("w1", r.w1));
    table.push(complex("w2", r.w2));
    table.push(real("h11", r.h11));
    table.push(real("h12", r.h12));
    table.push(real("t", r.t));
    table.push(real("alpha", r.alpha));
    table.push(real("beta", r.beta));
    table.push(complex("rotated_h12", r.rotated_h12));
    table.push(complex("rotated_h21", r.rotated_h21));
    table.push(real("rotated_norm_sq", r.rotated_norm_sq));
}

/// Worker count: the request (or all cores), capped by `POLYRING_WORKERS`
/// and by the number of grid points.
pub fn worker_count(requested: Option<usize>, steps: usize) -> Result<usize, CliError> {
    let cap = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| CliError::input(format!("{WORKERS_ENV}={v:?} is not a positive integer")))?,
        ),
        Err(_) => None,
    };
    let want = requested.unwrap_or_else(rayon::current_num_threads);
    Ok(want.min(cap.unwrap_or(usize::MAX)).min(steps).max(1))
}

fn sweep(command: &Command, c: &SweepConfig, out_dir: Option<&Path>) -> Result<Report, CliError> {
    let dir = out_dir.ok_or_else(|| CliError::input("sweep writes shard files and needs --out-dir"))?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let workers = worker_count(c.workers, c.steps)?;
    let thetas: Vec<f64> = (0..c.steps)
        .map(|i| {
            if c.steps == 1 {
                c.theta_min
            } else {
                c.theta_min + (c.theta_max - c.theta_min) * i as f64 / (c.steps - 1) as f64
            }
        })
        .collect();
    let chunk = thetas.len().div_ceil(workers);
    let shards: Vec<(usize, &[f64])> = thetas.chunks(chunk).enumerate().collect();

    let mut headers = vec!["theta".to_string(), "dominant".into(), "method".into()];
    headers.extend((0..c.n).map(|k| format!("eta_{k}")));
    let tolerances = BTreeMap::from([("dominance_threshold", THRESHOLD_TOLERANCE)]);
    let meta = Meta { command, tolerances: &tolerances };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::input(format!("cannot start {workers} workers: {e}")))?;
    let summaries: Vec<Value> = pool.install(|| {
        shards
            .par_iter()
            .map(|&(index, thetas)| -> Result<Value, CliError> {
                let mut table = Table::new(format!("sweep-shard-{index:03}"), &[]);
                table.headers = headers.clone();
                for &theta in thetas {
                    let p = TransformParams::new(theta, c.lambda)?;
                    let eta = eigenvalues_eta(&p, c.n)?;
                    let (dominant, method) = match try_dominance(&p, c.n)? {
                        Some(d) => (d.index.to_string(), format!("{:?}", d.method).to_lowercase()),
                        None => ("ambiguous".into(), String::new()),
                    };
                    let mut row = vec![num(theta), dominant, method];
                    row.extend(eta.into_iter().map(num));
                    table.push(row);
                }
                let notes = vec![("shard".to_string(), format!("{} of {}", index, shards.len()))];
                let file = format!("{}.csv", table.name);
                let path = dir.join(&file);
                let text = crate::output::render_csv(&meta, &notes, &table)?;
                std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
                Ok(json!({
                    "file": file,
                    "rows": thetas.len(),
                    "theta_first": thetas.first(),
                    "theta_last": thetas.last(),
                }))
            })
            .collect::<Result<_, _>>()
    })?;

    let mut table = Table::new("shards", &["file", "rows", "theta_first", "theta_last"]);
    for s in &summaries {
        table.push(vec![
            s["file"].as_str().unwrap_or_default().to_string(),
            s["rows"].to_string(),
            s["theta_first"].to_string(),
            s["theta_last"].to_string(),
        ]);
    }
    Ok(Report {
        result: json!({"workers": workers, "shards": summaries}),
        tables: vec![table],
        tolerances,
        notes: vec![("workers".into(), workers.to_string())],
    })
}
