use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sgpv-select"));
    c.env_remove("SGPV_SELECT_WORKERS");
    c
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn fixture(dir: &Path) -> std::path::PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut text = String::from("x1,x2,y\n");
    for i in 0..500 {
        let x1: f64 = rng.random_range(-1.0..1.0);
        let x2: f64 = rng.random_range(-1.0..1.0);
        let y = 2.0 * x1 + 0.5 * rng.random_range(-1.0..1.0);
        if i == 7 {
            text.push_str(&format!("{x1},NA,{y}\n"));
        } else {
            text.push_str(&format!("{x1},{x2},{y}\n"));
        }
    }
    let path = dir.join("data.csv");
    fs::write(&path, text).unwrap();
    path
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn fit_selects_true_signal() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let out = dir.path().join("fit");
    let o = run(bin().args(["fit", "--outcome", "y", "--method", "all"]).arg("--data").arg(&data).arg("--out").arg(&out));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dropped 1 rows"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"], 499);
    let methods = report["result"]["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 4);
    let pro = &methods[0];
    assert_eq!(pro["method"], "prosgpv");
    assert_eq!(pro["selected"], serde_json::json!(["x1"]));
    let entry = pro["diagnostics"]["sgpv"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["variable"] == "x1")
        .unwrap();
    assert_eq!(entry["sgpv"], 0.0);
    assert!(pro["coefficients"][0]["se"].as_f64().unwrap() > 0.0);
    assert!((pro["coefficients"][0]["estimate"].as_f64().unwrap() - 2.0).abs() < 0.1);
}

#[test]
fn fit_reports_missing_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let o = bin().args(["fit", "--outcome", "nope"]).arg("--data").arg(&data).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("outcome column `nope` not found"));
}

#[test]
fn fit_repeated_splits() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let out = dir.path().join("splits");
    run(bin()
        .args(["fit", "--outcome", "y", "--method", "prosgpv,lasso", "--splits", "20", "--train-frac", "0.7", "--workers", "3"])
        .arg("--data")
        .arg(&data)
        .arg("--out")
        .arg(&out));
    let rows = read_csv(&out.join("splits.csv"));
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r[2] == "ok"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["train_rows"], 349);
    assert_eq!(report["result"]["methods"][0]["selection_frequency"]["x1"], 1.0);
}

#[test]
fn simulate_one_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    run(bin()
        .args(["simulate", "--n", "60", "--p", "8", "--s", "2", "--reps", "1", "--seed", "4", "--method", "all", "--workers", "1"])
        .arg("--out")
        .arg(&out));
    let rows = read_csv(&out.join("replications.csv"));
    assert_eq!(rows.len(), 5);
    let methods: Vec<&str> = rows.iter().map(|r| r[6].as_str()).collect();
    assert_eq!(methods, ["prosgpv", "prosgpv1", "lasso", "alasso", "oracle"]);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["replication_failures"], 0);
    assert!(summary["metadata"]["generated_unix_seconds"].is_u64());
}

#[test]
fn simulate_rejects_lists() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["simulate", "--n", "60,80"]).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!o.status.success());
}

#[test]
fn sweep_counts_cells_and_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        run(bin()
            .args(["sweep", "--n", "100,200", "--rho", "0,0.7", "--p", "10", "--s", "3", "--reps", "4", "--seed", "9"])
            .args(["--method", "prosgpv,lasso", "--workers", workers])
            .arg("--out")
            .arg(&out));
        out
    };
    let a = sweep("1", "a");
    let b = sweep("8", "b");
    let rows = read_csv(&a.join("aggregates.csv"));
    assert_eq!(rows.len(), 8);
    for file in ["replications.csv", "aggregates.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let strip = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("summary.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("metadata");
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"n": 400, "p": 5, "rho": 0.5, "beta": [0, 0, 0.28, 0, 0], "sigma2": 1.0, "reps": 50, "seed": 3, "method": "prosgpv,lasso"}"#,
    )
    .unwrap();
    let out = dir.path().join("cfg");
    run(bin().args(["simulate", "--reps", "6", "--workers", "2"]).arg("--config").arg(&cfg).arg("--out").arg(&out));
    let rows = read_csv(&out.join("replications.csv"));
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0][1], "400");
    assert_eq!(rows[0][3], "1");
}

#[test]
fn workers_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env");
    run(bin()
        .env("SGPV_SELECT_WORKERS", "3")
        .args(["simulate", "--n", "50", "--p", "6", "--s", "2", "--reps", "2", "--method", "lasso"])
        .arg("--out")
        .arg(&out));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["metadata"]["workers"], 3);
}
