use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polyring(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyring"))
        .args(args)
        .env_remove("POLYRING_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = polyring(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn ok_text(args: &[&str]) -> String {
    let out = polyring(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV artifact (comments and header stripped).
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn comment(text: &str, key: &str) -> String {
    let prefix = format!("# {key}: ");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no {key} comment")).to_string()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn csv_artifacts_carry_metadata() {
    let text =
        ok_text(&["polygon", "--random", "6", "--seed", "7", "--theta", "1.2566", "decompose", "--format", "csv"]);
    assert!(text.starts_with("# tool: polyring "));
    let config: Value = serde_json::from_str(&comment(&text, "config")).unwrap();
    assert_eq!(config["source"]["random"]["seed"], 7);
    assert!(comment(&text, "tolerances").contains("dominance_threshold"));
    assert_eq!(csv_rows(&text).len(), 6);
    assert!(comment(&text, "reconstruction_residual").parse::<f64>().unwrap() < 1e-12);
}

#[test]
fn regular_pentagon_is_pure_k1() {
    let v = ok_json(&["polygon", "--regular", "5", "decompose"]);
    for c in v["result"]["coefficients"].as_array().unwrap() {
        let abs = f(&c["abs"]);
        if c["k"] == 1 {
            assert!((abs - 5f64.sqrt()).abs() < 1e-12);
        } else {
            assert!(abs < 1e-12);
        }
    }
}

#[test]
fn eigen_table_flags_the_dominant_index() {
    let v = ok_json(&["polygon", "--regular", "5", "--theta-frac", "1", "5", "eigen"]);
    assert_eq!(v["result"]["dominant"]["index"], 1);
    assert_eq!(v["result"]["dominant"]["method"], "interval");
    assert_eq!(v["result"]["thresholds"].as_array().unwrap().len(), 2);
}

#[test]
fn iteration_converges() {
    let v = ok_json(&["polygon", "--random", "6", "--seed", "3", "--theta", "1.2566", "iterate", "--tol", "1e-10"]);
    let report = &v["result"]["report"];
    assert_eq!(report["converged"], true);
    assert!(f(&report["dominant_mass"]) >= 1.0 - 1e-8);
}

#[test]
fn well_spectrum_and_shift() {
    let plain = ok_json(&["well", "--L", "1", "--V0", "800", "--l", "6"]);
    let moved = ok_json(&["well", "--L", "1", "--V0", "800", "--l", "6", "--shift", "800"]);
    let (a, b) = (plain["result"]["states"].as_array().unwrap(), moved["result"]["states"].as_array().unwrap());
    assert!(!a.is_empty() && a.len() == b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x["k"], y["k"]);
        assert_eq!(x["kappa"], y["kappa"]);
        assert!((f(&y["energy"]) - f(&x["energy"]) - 800.0).abs() < 1e-10);
    }
}

#[test]
fn shallow_well_exits_cleanly() {
    let v = ok_json(&["well", "--L", "1", "--V0", "0.0001", "--l", "6"]);
    let states = v["result"]["states"].as_array().unwrap();
    assert!(states.is_empty() || f(&states[0]["energy"]) > -1e-4);
    if states.is_empty() {
        assert_eq!(v["result"]["note"], "no bound states");
    }
}

#[test]
fn wavefunction_samples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok_text(&["well", "--L", "1", "--V0", "800", "--l", "6", "--psi-samples", "60", "--out-dir", d]);
    let psi = std::fs::read_to_string(dir.path().join("psi.csv")).unwrap();
    let rows = csv_rows(&psi);
    assert_eq!(rows.len(), 60);
    let peak: f64 = rows[0][1].parse().unwrap();
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() <= peak));
}

#[test]
fn ring_six_wells() {
    let v = ok_json(&["ring", "--n", "6", "--L", "1", "--V0", "800", "--a", "3"]);
    let r = &v["result"];
    assert_eq!(r["energies"].as_array().unwrap().len(), 6);
    assert!(f(&r["residual"]) < 1e-8);
    assert_eq!(r["path"], "circulant");
    assert_eq!(r["s"].as_array().unwrap().len(), 6);
}

#[test]
fn distant_wells_are_degenerate() {
    let v = ok_json(&["ring", "--n", "3", "--L", "1", "--V0", "800", "--a", "20"]);
    let e: Vec<f64> = v["result"]["energies"].as_array().unwrap().iter().map(f).collect();
    let spread = e.iter().cloned().fold(f64::MIN, f64::max) - e.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-6, "{spread}");
}

#[test]
fn truncation_adds_an_error_column() {
    let text =
        ok_text(&["ring", "--n", "6", "--L", "1", "--V0", "800", "--a", "3", "--truncate-nn", "--format", "csv"]);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "j,energy,truncation_error");
}

#[test]
fn map_raw_pair() {
    let v = ok_json(&["map", "--theta-frac", "2", "5", "--lambda", "0.5", "--h11", "-0.836608", "--h12", "-0.947965"]);
    let r = &v["result"];
    assert!((f(&r["alpha"]) - 1.6013).abs() < 1e-3);
    assert!((f(&r["beta"]) + 0.57434).abs() < 1e-3);
    assert!((f(&r["rotated_h21"]["re"]) - f(&r["w2"]["re"])).abs() < 1e-10);
    assert!((f(&r["rotated_h21"]["im"]) - f(&r["w2"]["im"])).abs() < 1e-10);
    assert!(r["warning"].as_str().unwrap().contains("not normalised"));
}

#[test]
fn map_targets_only() {
    let v = ok_json(&["map", "--theta", "1.2566", "--lambda", "0.5", "--w-only"]);
    assert!((f(&v["result"]["w1"]) - 5.23607).abs() < 1e-3 * 5.23607);
    assert!((f(&v["result"]["w2"]["re"]) + 2.11803).abs() < 1e-3 * 2.11803);
    assert!((f(&v["result"]["w2"]["im"]) - 1.53884).abs() < 1e-3 * 1.53884);
}

#[test]
fn map_from_ring_geometry() {
    let v = ok_json(&["map", "--theta-frac", "2", "5", "--n", "6", "--L", "1", "--V0", "800", "--a", "3"]);
    let r = &v["result"];
    assert!((f(&r["t"]) - (f(&r["w1"]) - f(&r["h11"]))).abs() == 0.0);
    assert!((f(&r["rotated_h21"]["im"]) - f(&r["w2"]["im"])).abs() < 1e-10);
}

#[test]
fn exit_codes() {
    assert_eq!(polyring(&["map", "--theta", "0", "--w-only"]).status.code(), Some(2));
    assert_eq!(polyring(&["well", "--L", "1", "--V0", "-5", "--l", "6"]).status.code(), Some(2));
    assert_eq!(polyring(&["polygon", "--regular", "2", "eigen"]).status.code(), Some(2));
    assert_eq!(polyring(&["no-such-command"]).status.code(), Some(2));
    // No real rotation for a vanishing coupling.
    let out = polyring(&["map", "--theta", "1.0", "--h11", "-1", "--h12", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no real rotation"));
    // theta exactly on a dominance threshold.
    let out = polyring(&["polygon", "--regular", "4", "--theta-frac", "1", "8", "iterate"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_polygon_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    std::fs::write(&path, "# square\n1,0\n0 1\n-1,zero\n0,-1\n").unwrap();
    let out = polyring(&["polygon", "--file", path.to_str().unwrap(), "decompose"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    std::fs::write(&path, "# square\n1,0\n0 1\n-1,0\n0,-1\n").unwrap();
    let v = ok_json(&["polygon", "--file", path.to_str().unwrap(), "decompose"]);
    assert_eq!(v["result"]["n"], 4);
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for args in [
        vec!["polygon", "--random", "7", "--seed", "42", "iterate"],
        vec!["ring", "--n", "4", "--L", "1", "--V0", "400", "--a", "2.5", "--truncate-nn"],
    ] {
        let run = |dir: &Path| {
            let mut full = args.clone();
            full.extend(["--out-dir", dir.to_str().unwrap()]);
            polyring(&full)
        };
        let (x, y) = (run(a.path()), run(b.path()));
        assert!(x.status.success());
        assert_eq!(x.stdout, y.stdout);
        assert_eq!(read_dir_sorted(a.path()), read_dir_sorted(b.path()));
    }
}

#[test]
fn saved_configs_replay_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["polygon", "--vertices", "1,0;0.5,0.7;-0.3,0.2;0.1,-0.9", "--theta", "0.3", "--lambda", "0.25", "decompose"],
        &["well", "--L", "1.5", "--V0", "300", "--l", "9", "--shift", "300", "--count", "1"],
        &["map", "--theta-frac", "2", "5", "--h11", "-0.836608", "--h12", "-0.947965"],
        &["polygon", "--random", "5", "--seed", "18446744073709551615", "eigen"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("c{i}.json"));
        let mut full = args.to_vec();
        full.extend(["--save-config", cfg.to_str().unwrap()]);
        let first = ok_text(&full);
        let again = ok_text(&["run", "--config", cfg.to_str().unwrap()]);
        assert_eq!(first, again, "{args:?}");

        let resaved = dir.path().join(format!("r{i}.json"));
        ok_text(&["run", "--config", cfg.to_str().unwrap(), "--save-config", resaved.to_str().unwrap()]);
        assert_eq!(std::fs::read(&cfg).unwrap(), std::fs::read(&resaved).unwrap());
    }
}

#[test]
fn sweep_writes_one_shard_per_worker() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polyring"))
        .args(["sweep", "--n", "6", "--steps", "101", "--workers", "4", "--out-dir", dir.path().to_str().unwrap()])
        .env("POLYRING_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["workers"], 3);
    let mut total = 0;
    for i in 0..3 {
        let text = std::fs::read_to_string(dir.path().join(format!("sweep-shard-{i:03}.csv"))).unwrap();
        let rows = csv_rows(&text);
        assert!(rows.iter().all(|r| r.len() == 3 + 6));
        total += rows.len();
    }
    assert_eq!(total, 101);
    assert!(!dir.path().join("sweep-shard-003.csv").exists());

    let bad = Command::new(env!("CARGO_BIN_EXE_polyring"))
        .args(["sweep", "--n", "6", "--out-dir", dir.path().to_str().unwrap()])
        .env("POLYRING_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
