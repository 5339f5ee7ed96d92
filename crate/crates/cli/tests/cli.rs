//! End-to-end tests for the `gbt` binary: exit codes, artifacts, and
//! determinism of the CSV outputs.

use assert_cmd::Command;
use predicates::prelude::*;
use std::fs;
use std::path::Path;

fn write_config(dir: &Path, sigma: f64) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        format!(
            r#"{{
  "system": "builtin:cart_double_pendulum",
  "L": 200,
  "input": {{ "type": "benchmark" }},
  "noise": {{ "sigma": {sigma}, "phi_scale": 1.35 }},
  "seed": 0,
  "order_r": 3
}}"#
        ),
    )
    .unwrap();
    path
}

fn gbt() -> Command {
    Command::cargo_bin("gbt").unwrap()
}

#[test]
fn missing_config_is_invalid() {
    gbt()
        .args(["simulate"])
        .assert()
        .code(1)
        .stdout(predicate::str::contains("--config is required"));
}

#[test]
fn malformed_config_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{ not json").unwrap();
    gbt()
        .args(["simulate", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .assert()
        .code(1);
}

#[test]
fn bad_sweep_spec_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.01);
    gbt()
        .args(["pipeline", "--sweep", "tau=1,2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .assert()
        .code(1)
        .stdout(predicate::str::contains("sigma=a,b,c"));
}

#[test]
fn oracle_runs_without_config() {
    let dir = tempfile::tempdir().unwrap();
    gbt()
        .args(["oracle", "--out"])
        .arg(dir.path())
        .assert()
        .success()
        .stdout(predicate::str::contains("ordinary_bt_error"));
    let hsv = fs::read_to_string(dir.path().join("hsv_true.csv")).unwrap();
    assert!(hsv.starts_with("index,sigma,value\n"));
    assert_eq!(hsv.lines().count(), 7, "header plus six singular values");
    assert!(dir.path().join("oracle.json").exists());
}

#[test]
fn simulate_writes_deterministic_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.01);
    for sub in ["a", "b"] {
        gbt()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(sub))
            .assert()
            .success();
    }
    for name in ["U_minus.csv", "X.csv", "Y_minus.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let x = fs::read_to_string(dir.path().join("a/X.csv")).unwrap();
    assert_eq!(x.lines().count(), 6, "X has n = 6 rows");
    assert_eq!(x.lines().next().unwrap().split(',').count(), 201, "L + 1 samples");
}

#[test]
fn build_qmi_reports_slater() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.01);
    gbt()
        .args(["build-qmi", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .assert()
        .success()
        .stdout(predicate::str::contains("\"slater\":true"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("slater.json")).unwrap())
            .unwrap();
    assert_eq!(report["inertia"]["pos"], 7);
    assert_eq!(report["regular"], true);
    assert!(dir.path().join("N.csv").exists());
}

#[test]
fn sigma_override_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.01);
    gbt()
        .args(["simulate", "--sigma", "0.05", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("hi"))
        .assert()
        .success()
        .stdout(predicate::str::contains("\"sigma\":0.05"));
}

#[test]
fn pipeline_end_to_end_and_deterministic_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.01);
    for sub in ["a", "b"] {
        gbt()
            .args(["pipeline", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(sub))
            .assert()
            .success()
            .stdout(predicate::str::contains("\"informative\":true"));
    }
    for name in ["hsv.csv", "bounds.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["slater"], true);
    assert_eq!(report["informative"], true);
    let actual = report["oracle"]["actual_error_center_rom"].as_f64().unwrap();
    let gamma0 = report["gamma0"].as_f64().unwrap();
    let gamma = report["gamma"].as_f64().unwrap();
    assert!(actual <= gamma0 + 1e-6, "actual {actual} > gamma0 {gamma0}");
    assert!(gamma0 <= gamma + 1e-6, "gamma0 {gamma0} > gamma {gamma}");
    let bounds = fs::read_to_string(dir.path().join("a/bounds.csv")).unwrap();
    assert!(bounds.starts_with("sigma,gamma,gamma0,actual_error,ordinary_bt_error\n"));
}
