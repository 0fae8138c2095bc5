use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hybridtp"));
    c.env_remove("HYBRIDTP_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn hybridtp")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn circuit_run_reproduces_table3_and_is_deterministic() {
    let a = run(&["circuit-run", "--shots", "8192", "--seed", "42"]);
    let b = run(&["circuit-run", "--shots", "8192", "--seed", "42"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 42);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for r in rows {
        assert!((r["exact"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!((r["sampled"][0].as_f64().unwrap() - 0.5).abs() <= 0.02);
        assert!((r["sampled"][1].as_f64().unwrap() - 0.5).abs() <= 0.02);
    }
    // off-diagonal phase follows φ wherever the coherence is nonzero
    let r = &rows[2];
    let phi = r["phi"].as_f64().unwrap();
    assert!((r["coherence_phase"].as_f64().unwrap() - phi).abs() < 1e-9);
}

#[test]
fn seed_falls_back_to_environment() {
    let out = bin().args(["circuit-run", "--shots", "10", "--phis", "0"]).env("HYBRIDTP_SEED", "99").output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 99);
    let out = bin().args(["circuit-run", "--shots", "10", "--phis", "0", "--seed", "5"]).env("HYBRIDTP_SEED", "99").output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 5);
    let out = bin().args(["circuit-run", "--shots", "10"]).env("HYBRIDTP_SEED", "nope").output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "circuit-run", "shots": 16, "seed": 3, "phis": ["0.25pi", 0.0]}"#).unwrap();
    let v = ok_json(&["circuit-run", "--config", path_str(&cfg)]);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["shots"], 16);
    assert_eq!(v["rows"][0]["phi"].as_f64().unwrap(), std::f64::consts::FRAC_PI_4);
    let v = ok_json(&["circuit-run", "--config", path_str(&cfg), "--seed", "8"]);
    assert_eq!(v["seed"], 8);

    std::fs::write(&cfg, r#"{"shots": 16, "unknown_key": 1}"#).unwrap();
    assert_eq!(code(&run(&["circuit-run", "--config", path_str(&cfg)])), 2);
    std::fs::write(&cfg, r#"{"command": "wigner-grid"}"#).unwrap();
    assert_eq!(code(&run(&["circuit-run", "--config", path_str(&cfg)])), 2);
    assert_eq!(code(&run(&["circuit-run", "--config", "/nonexistent/cfg.json"])), 2);
}

#[test]
fn angle_forms_agree() {
    let a = run(&["protocol-run", "--phi", "0.25pi"]);
    let b = run(&["protocol-run", "--phi", "0.78539816339744828"]);
    let c = run(&["protocol-run", "--phi", "pi/4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn protocol_run_lists_the_correction_table() {
    let v = ok_json(&["protocol-run", "--x", "0.6", "--y", "0,0.8"]);
    let rows = v["branches"].as_array().unwrap();
    let got: Vec<(String, u64, String)> = rows
        .iter()
        .map(|r| (r["bell"].as_str().unwrap().into(), r["count"].as_u64().unwrap(), r["correction"].as_str().unwrap().into()))
        .collect();
    let want = [
        ("phi+", 0, "U1"),
        ("phi+", 1, "I"),
        ("phi-", 0, "I"),
        ("phi-", 1, "U1"),
        ("psi+", 0, "-U3"),
        ("psi+", 1, "U2"),
        ("psi-", 0, "-U2"),
        ("psi-", 1, "U3"),
    ];
    for (g, w) in got.iter().zip(want) {
        assert_eq!((g.0.as_str(), g.1, g.2.as_str()), w);
    }
    for r in rows {
        assert!((r["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
    assert!((v["probability_sum"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(code(&run(&["protocol-run", "--x", "0.6", "--y", "0.6"])), 2);
    assert_eq!(code(&run(&["protocol-run", "--x", "1", "--phi", "0"])), 2);
}

#[test]
fn protocol_run_reports_first_order_pipeline() {
    let v = ok_json(&["protocol-run", "--phi", "0.5pi", "--alpha", "0.05", "--cutoff", "12"]);
    let fo = &v["first_order"];
    assert!((fo["fidelity_numeric"].as_f64().unwrap() - fo["fidelity_closed"].as_f64().unwrap()).abs() < 0.01);
    assert!((fo["fidelity_closed"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn fidelity_sweep_landmarks() {
    let v = ok_json(&["fidelity-sweep", "--steps", "5", "--relation", "equal", "--cutoff", "12"]);
    assert!((v["f_closed_first_max"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    for r in v["rows"].as_array().unwrap() {
        let closed = r["F_closed_first"].as_f64().unwrap();
        let numeric = r["F_numeric_first"].as_f64().unwrap();
        assert!((closed - numeric).abs() < 0.01);
    }
    // with θ_B − θ_C = π/2 the closed form stays at or below 3/4
    let v = ok_json(&["fidelity-sweep", "--steps", "9", "--relation", "quadrature", "--skip-numeric"]);
    assert!(v["f_closed_first_max"].as_f64().unwrap() <= 0.75 + 1e-12);
    assert!(v["rows"][0]["F_numeric_first"].is_null());
}

#[test]
fn empty_sweep_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let r = run(&["fidelity-sweep", "--steps", "0", "-o", path_str(&out)]);
    assert_eq!(code(&r), 2);
    assert!(!out.exists());
}

#[test]
fn csv_round_trips_json_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let json_path = dir.path().join("sweep.json");
    let args = ["fidelity-sweep", "--steps", "4", "--relation", "grid", "--cutoff", "10"];
    assert!(run(&[&args[..], &["-o", path_str(&csv_path)]].concat()).status.success());
    assert!(run(&[&args[..], &["-o", path_str(&json_path)]].concat()).status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(&json_path).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let records: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), rows.len());
    assert_eq!(rows.len(), 64);
    for (rec, row) in records.iter().zip(rows) {
        for (h, cell) in headers.iter().zip(rec.iter()) {
            assert_eq!(cell.parse::<f64>().unwrap(), row[h].as_f64().unwrap(), "{h}");
        }
    }
}

#[test]
fn wigner_grid_csv_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("panel.csv");
    let r = run(&["wigner-grid", "--alpha", "1", "--c-outcome", "0", "--d-outcome", "0", "--points", "41", "-o", path_str(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("panel.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["classification"]["class"], "coherent");
    assert!((meta["integral"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!(meta["min"].as_f64().unwrap() > -1e-12);
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["q", "p", "W"]);
    assert_eq!(rdr.records().count(), 41 * 41);
}

#[test]
fn wigner_grid_odd_cat_from_squeezed_resource() {
    let v = ok_json(&["wigner-grid", "--zeta", "0.18", "--c-outcome", "+", "--points", "21", "--cutoff", "16"]);
    let cl = &v["meta"]["classification"];
    assert_eq!(cl["class"], "odd_cat");
    assert!((cl["odd_amplitude"].as_f64().unwrap() - 0.73).abs() < 0.01);
    assert!(v["meta"]["min"].as_f64().unwrap() < 0.0);
    assert_eq!(v["w"].as_array().unwrap().len(), 21);
}

#[test]
fn empty_wigner_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let r = run(&["wigner-grid", "--points", "1", "-o", path_str(&out)]);
    assert_eq!(code(&r), 2);
    assert!(!out.exists());
    assert!(!dir.path().join("w.meta.json").exists());
}

#[test]
fn insufficient_cutoff_is_a_numeric_failure() {
    let r = run(&["resource-info", "--alpha", "4", "--cutoff", "5"]);
    assert_eq!(code(&r), 3, "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let r = run(&["protocol-run", "-o", "/nonexistent-dir/out.json"]);
    assert_eq!(code(&r), 4);
}

#[test]
fn unknown_flag_is_a_config_error() {
    assert_eq!(code(&run(&["circuit-run", "--bogus"])), 2);
    assert_eq!(code(&run(&["protocol-run", "--phi", "abc"])), 2);
}

#[test]
fn custom_circuit_import() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bell.json");
    std::fs::write(
        &path,
        r#"{"qubits": ["A", "B"], "gates": [{"kind": "H", "target": "A"}, {"kind": "CNOT", "control": "A", "target": "B"}]}"#,
    )
    .unwrap();
    let v = ok_json(&["circuit-run", "--circuit", path_str(&path), "--shots", "1000", "--seed", "1"]);
    let counts = v["counts"].as_object().unwrap();
    assert!(counts.keys().all(|k| k == "00" || k == "11"));
    assert_eq!(counts.values().map(|c| c.as_u64().unwrap()).sum::<u64>(), 1000);
    assert!((v["probabilities"]["11"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    std::fs::write(&path, r#"{"qubits": ["A"], "gates": [{"kind": "CNOT", "control": "B", "target": "A"}]}"#).unwrap();
    assert_eq!(code(&run(&["circuit-run", "--circuit", path_str(&path)])), 2);
}

#[test]
fn resource_info_reports_quadrature_values() {
    let v = ok_json(&["resource-info", "--alpha", "0.5", "--theta-b", "0.5pi", "--theta-d", "0.5pi", "--cutoff", "16"]);
    let q = &v["quadrature_xxx"];
    assert!((q["numeric"].as_f64().unwrap() - q["exact"].as_f64().unwrap()).abs() < 1e-10);
    assert!((v["coherent_overlap"].as_f64().unwrap() - (-0.5f64).exp()).abs() < 1e-12);
    let v = ok_json(&["resource-info", "--zeta", "0.18"]);
    let amps = v["cat_amplitudes"].as_array().unwrap();
    assert!((amps[0].as_f64().unwrap() - 0.42).abs() < 0.005);
}
