use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, config: &str, args: &[&str], env: &[(&str, &str)]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fene-fps"));
    cmd.arg("--config").arg(&cfg).arg("--out").arg(dir.join("out")).args(args);
    cmd.env_remove("FENE_FPS_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

fn diagnostic(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("diagnostic on stderr");
    serde_json::from_str(line).unwrap()
}

const SHEAR: &str = r#""drift": {"type": "linear", "matrix": [0, 1, 0, 0], "wi": 1}"#;

#[test]
fn equilibrium_solve_pipeline() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"mode": "solve", "model": {"delta": 8},
        "discretization": {"degree": 12},
        "output": {"field_csv_path": "field.csv", "field_grid": {"n_r": 20, "n_theta": 16}}}"#;
    let out = run(dir.path(), cfg, &[], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    let alpha = r["setup"]["alpha"].as_f64().unwrap();
    assert!(r["eigen"]["principal_lambda"].as_f64().unwrap().abs() <= 1e-10 * alpha);
    for row in r["stress"]["components"].as_array().unwrap() {
        for v in row.as_array().unwrap() {
            assert!(v.as_f64().unwrap().abs() <= 1e-10);
        }
    }
    let (lo, hi) = (
        r["eigen"]["min_ratio"].as_f64().unwrap(),
        r["eigen"]["max_ratio"].as_f64().unwrap(),
    );
    assert!(hi / lo - 1.0 < 1e-9);
    assert!(r["eigen"]["min_real_part"].is_null());

    let csv = fs::read_to_string(dir.path().join("out/field.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,theta,psi,ratio"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20 * 16);
    for row in &rows {
        assert!(row[3] > 0.0);
        if row[0] == 1.0 {
            assert_eq!(row[2], 0.0);
        }
    }
    let status: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(status["status"], "ok");
}

#[test]
fn spectrum_mode_reports_nonnegative_real_parts() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{"mode": "spectrum", {SHEAR}, "discretization": {{"degree": 12}}}}"#);
    let out = run(dir.path(), &cfg, &[], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    let alpha = r["setup"]["alpha"].as_f64().unwrap();
    let min_re = r["eigen"]["min_real_part"].as_f64().unwrap();
    assert!(min_re >= -1e-6 * alpha, "{min_re}");
    assert_eq!(r["eigen"]["spectrum"].as_array().unwrap().len(), 91);
    assert!(r["principal_gap"].as_f64().unwrap() >= 1e-6 * alpha);
}

#[test]
fn sweep_csv_is_independent_of_thread_cap() {
    let cfg = format!(
        r#"{{"mode": "sweep", {SHEAR}, "discretization": {{"degree": 10}},
            "output": {{"sweep_values": [0.01, 0.5, 1.0, 2.0], "sweep_csv_path": "mf.csv"}}}}"#
    );
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let dir = TempDir::new().unwrap();
        let out = run(dir.path(), &cfg, &[], &[("FENE_FPS_THREADS", threads)]);
        assert_eq!(out.status.code(), Some(0));
        csvs.push(fs::read(dir.path().join("out/mf.csv")).unwrap());
        csvs.push(fs::read(dir.path().join("out/report.json")).unwrap());
    }
    assert_eq!(csvs[0], csvs[2]);
    assert_eq!(csvs[1], csvs[3]);
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("wi,S11,S12,S22,eta_p,psi1"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn compare_mode_agrees_within_three_std_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{"mode": "compare", {SHEAR}}}"#);
    let out = run(dir.path(), &cfg, &[], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    let worst = r["max_abs_delta_se"].as_f64().unwrap();
    assert!(worst <= 3.0, "{}", r["deltas"]);
    assert_eq!(r["deltas"].as_array().unwrap().len(), 4);
}

#[test]
fn oracle_mode_lists_equilibrium_reference() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"mode": "oracle", "sde": {"n_paths": 20, "n_steps": 200000, "burn_in": 20000}}"#;
    let out = run(dir.path(), cfg, &[], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["equilibrium_second_moment"].as_f64(), Some(0.1));
    let m2 = &r["oracle"]["radial_moment"];
    let (v, se) = (m2["value"][0].as_f64().unwrap(), m2["std_error"][0].as_f64().unwrap());
    assert!((v - 0.1).abs() <= 3.0 * se, "{v} +- {se}");
}

#[test]
fn repeated_runs_write_identical_bytes() {
    let cfg = format!(
        r#"{{"mode": "compare", {SHEAR}, "discretization": {{"degree": 10}},
            "sde": {{"n_paths": 20, "n_steps": 20000, "burn_in": 2000, "seed": 9}}}}"#
    );
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(run(a.path(), &cfg, &[], &[("FENE_FPS_THREADS", "1")]).status.code(), Some(0));
    assert_eq!(run(b.path(), &cfg, &[], &[("FENE_FPS_THREADS", "2")]).status.code(), Some(0));
    assert_eq!(
        fs::read(a.path().join("out/report.json")).unwrap(),
        fs::read(b.path().join("out/report.json")).unwrap()
    );
}

#[test]
fn flags_override_the_configuration() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"mode": "spectrum", "discretization": {"degree": 30}}"#;
    // degree 30 is too large for the dense path; the flags fix that
    let out = run(dir.path(), cfg, &["--degree", "8", "--mode", "solve", "--seed", "17"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["setup"]["basis_dim"], 45);
    assert_eq!(r["metadata"]["mode"], "solve");
    assert_eq!(r["metadata"]["config"]["solver"]["seed"], 17);
    assert_eq!(r["metadata"]["config"]["sde"]["seed"], 17);
}

fn expect_validation(config: &str, env: &[(&str, &str)], field: &str) {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), config, &[], env);
    assert_eq!(out.status.code(), Some(2), "config {config}");
    let d = diagnostic(&out);
    assert_eq!(d["field"], field, "{d}");
    assert_eq!(d["kind"], "validation");
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn validation_failures_exit_with_two_and_name_the_field() {
    expect_validation(r#"{"model": {"delta": 1.0}}"#, &[], "model.delta");
    expect_validation(r#"{"model": {"mu": -1}}"#, &[], "model.mu");
    expect_validation(r#"{"solver": {"max_iter": 0}}"#, &[], "solver.max_iter");
    expect_validation(r#"{"solver": {"tolerance": 1e-8}}"#, &[], "solver.tolerance");
    expect_validation(r#"{"drift": {"type": "linear", "matrix": [1, 0, 0, 1]}}"#, &[], "drift.matrix");
    expect_validation(r#"{"drift": {"type": "quadratic"}}"#, &[], "drift.type");
    expect_validation(r#"{"mode": "oracle", "sde": {"burn_in": 5, "n_steps": 5}}"#, &[], "sde.burn_in");
    expect_validation(r#"{"mode": "sweep", "drift": {"type": "linear", "matrix": [0, 1, 0, 0]}}"#, &[], "output.sweep_values");
    expect_validation(r#"{"discretization": {"degree": 99}}"#, &[], "discretization.degree");
    expect_validation("{not json", &[], "config");
    expect_validation("{}", &[("FENE_FPS_THREADS", "zero")], "FENE_FPS_THREADS");
}

#[test]
fn missing_config_and_bad_flags_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fene-fps"))
        .arg("--config")
        .arg(dir.path().join("absent.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(diagnostic(&out)["field"], "--config");

    let out = run(dir.path(), "{}", &["--mode", "turbo"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(diagnostic(&out)["status"], "error");
}

#[test]
fn non_convergence_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{{SHEAR}, "discretization": {{"degree": 10}}, "solver": {{"max_iter": 2}}}}"#);
    let out = run(dir.path(), &cfg, &[], &[]);
    assert_eq!(out.status.code(), Some(3));
    let d = diagnostic(&out);
    assert_eq!(d["kind"], "convergence");
    assert_eq!(d["exit_code"], 3);
}
