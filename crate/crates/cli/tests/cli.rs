use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracspde::kernel::{initial_smoothing, GreenProfile, InitialData, ModelParams};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracspde"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

/// Rows of a CSV as header-keyed maps.
fn rows(text: &str) -> Vec<Vec<(String, String)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            header
                .iter()
                .cloned()
                .zip(rec.iter().map(String::from))
                .collect()
        })
        .collect()
}

fn field(row: &[(String, String)], key: &str) -> f64 {
    row.iter()
        .find(|(k, _)| k == key)
        .unwrap()
        .1
        .parse()
        .unwrap()
}

fn text_field(row: &[(String, String)], key: &str) -> String {
    row.iter().find(|(k, _)| k == key).unwrap().1.clone()
}

fn reported(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no {key} in {out}"))
}

#[test]
fn ml_exponential_row() {
    let o = run(&["ml", "--beta", "1", "--x", "-1"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert!((field(&r[0], "value") - 0.3678794412).abs() < 1e-10);
}

#[test]
fn every_table_names_schema_and_hash() {
    let a = run(&["gbeta", "--beta", "0.5", "--u", "0.5,1,2"]);
    let b = run(&["gbeta", "--beta", "0.5", "--u", "0.5,1,2"]);
    let c = run(&["gbeta", "--beta", "0.5", "--u", "0.5,1"]);
    let (ra, rc) = (rows(&stdout(&a)), rows(&stdout(&c)));
    assert_eq!(ra.len(), 3);
    for row in &ra {
        assert_eq!(text_field(row, "schema_version"), "fracspde-run/1");
        assert_eq!(text_field(row, "config_hash").len(), 64);
    }
    assert_eq!(stdout(&a), stdout(&b));
    assert_ne!(
        text_field(&ra[0], "config_hash"),
        text_field(&rc[0], "config_hash")
    );
}

#[test]
fn l2norm_gaussian_constant() {
    let o = run(&[
        "l2norm", "--alpha", "2", "--beta", "1", "--nu", "1", "--d", "1", "--t", "1",
    ]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert!((field(&r[0], "cstar") - 0.199471).abs() < 1e-6);
}

#[test]
fn green_both_routes_agree() {
    let o = run(&[
        "green", "--beta", "0.5", "--alpha", "2", "--t", "1", "--x", "0", "--method", "both",
    ]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert!((field(&r[0], "fourier") - field(&r[0], "subordination")).abs() < 1e-6);
}

#[test]
fn table_output_to_file_with_record() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fet.csv");
    let rec = dir.path().join("fet.toml");
    let o = run(&[
        "fet",
        "--beta",
        "0.5",
        "--t",
        "1",
        "--x",
        "0.5,1",
        "--out",
        csv.to_str().unwrap(),
        "--record",
        rec.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let r = rows(&fs::read_to_string(&csv).unwrap());
    let record = fs::read_to_string(&rec).unwrap();
    assert!(record.contains("schema_version = \"fracspde-run/1\""));
    assert!(record.contains(&format!(
        "config_hash = \"{}\"",
        text_field(&r[0], "config_hash")
    )));
    let exact = (-0.25f64 / 4.0).exp() / std::f64::consts::PI.sqrt();
    assert!((field(&r[0], "f") - exact).abs() < 1e-8);
}

#[test]
fn renewal_ode_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let o = run(&[
        "renewal",
        "--C",
        "1",
        "--D",
        "1",
        "--gamma",
        "1",
        "--theta",
        "0",
        "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!((reported(&out, "formula_time") - 1.0).abs() < 1e-12);
    assert!((reported(&out, "numerical_time") - 1.0).abs() < 0.01);
    assert!(out.contains("ordering = holds"));
    let r = rows(&fs::read_to_string(&traj).unwrap());
    assert!(r.len() > 100);
    assert_eq!(field(&r[0], "h"), 1.0);
}

#[test]
fn renewal_drift_variant() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let o = run(&[
        "renewal",
        "--variant",
        "drift",
        "--kappa",
        "2",
        "--eta",
        "1",
        "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(reported(&stdout(&o), "formula_time"), 0.5);
}

#[test]
fn renewal_dirichlet_example() {
    let o = run(&[
        "renewal",
        "--variant",
        "dirichlet",
        "--c3",
        "1",
        "--c4",
        "1",
        "--eta",
        "1",
        "--beta",
        "0.25",
    ]);
    assert!(o.status.success());
    assert_eq!(reported(&stdout(&o), "formula_time"), 2.25);
}

#[test]
fn exit_code_two_for_bad_arguments() {
    assert_eq!(run(&["renewal", "--C", "1"]).status.code(), Some(2));
    assert_eq!(run(&["ml", "--beta", "0.5"]).status.code(), Some(2));
    assert_eq!(
        run(&["ml", "--beta", "1.5", "--x", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["green", "--alpha", "2"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn exit_code_two_for_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[model]\nalpha = 2.0\n").unwrap();
    let o = run(&[
        "simulate",
        bad.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let text = fs::read_to_string(config("additive.toml")).unwrap();
    fs::write(&bad, text.replace("cells = 256", "cells = 16")).unwrap();
    let o = run(&[
        "simulate",
        bad.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let missing = dir.path().join("missing.toml");
    let o = run(&["simulate", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_code_three_for_numerical_failure() {
    let o = run(&[
        "renewal",
        "--variant",
        "laplace",
        "--C",
        "0.1",
        "--D",
        "0.1",
        "--gamma",
        "0.5",
        "--theta",
        "0.5",
        "--T",
        "0.01",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exit_code_four_for_covariance_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("colored.toml")).unwrap().replace(
        "kind = \"riesz\"\nomega = 0.5",
        "kind = \"radial\"\nr = [0.0, 0.5, 0.6]\nf = [1.0, 1.0, 0.01]",
    );
    assert!(text.contains("radial"));
    let cfg = dir.path().join("box.toml");
    fs::write(&cfg, text).unwrap();
    let o = run(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn additive_run_passes_isometry_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate",
        config("additive.toml").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let r = rows(&fs::read_to_string(dir.path().join("moments.csv")).unwrap());
    let last = r.last().unwrap();
    assert_eq!(field(last, "t"), 1.0);
    let target = 2.0 * 0.5 / (2.0f64 * std::f64::consts::PI).sqrt();
    let allowed = 3.0 * field(last, "stderr") + 0.05 * target;
    assert!((field(last, "moment") - target).abs() <= allowed);
}

#[test]
fn supercritical_run_reports_explosion() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate",
        config("supercritical.toml").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("EXPLODED at t="));
}

#[test]
fn sigma_zero_matches_smoothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate",
        config("sigma-zero.toml").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let profile = GreenProfile::new(ModelParams::new(1.5, 0.5, 1.0, 1).unwrap()).unwrap();
    let u0 = InitialData::Ball {
        radius: 1.0,
        level: 2.0,
    };
    let r = rows(&fs::read_to_string(dir.path().join("moments.csv")).unwrap());
    for row in &r[1..] {
        let s = initial_smoothing(&profile, &u0, field(row, "t"), &[0.0]).unwrap();
        assert!((field(row, "moment") - s * s).abs() < 1e-9);
    }
    assert!(dir.path().join("snapshots.csv").exists());
}

#[test]
fn deterministic_fujita_run_explodes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate-det",
        config("fujita.toml").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("EXPLODED at t="));
    let r = rows(&fs::read_to_string(dir.path().join("deterministic.csv")).unwrap());
    assert_eq!(text_field(&r[0], "schema_version"), "fracspde-run/1");
}

#[test]
fn simulate_det_rejects_noise() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate-det",
        config("additive.toml").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn record_reexecution_is_identical() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let o = run(&[
        "simulate",
        config("colored.toml").to_str().unwrap(),
        "--out-dir",
        first.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let record = first.path().join("record.toml");
    // a different thread count must not change anything
    let o = bin()
        .env("FRACSPDE_THREADS", "1")
        .args(["simulate", record.to_str().unwrap(), "--threads", "3"])
        .args(["--out-dir", second.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    for name in ["record.toml", "moments.csv", "pairs.csv"] {
        let a = fs::read(first.path().join(name)).unwrap();
        let b = fs::read(second.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
}

#[test]
fn verify_filter_is_repeatable() {
    let a = run(&["verify", "--filter", "specialfn"]);
    let b = run(&["verify", "--filter", "specialfn"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.contains("criterion  1") && out.contains("criterion  2"));
    assert!(!out.contains("criterion  3"));
    assert!(out.contains("2/2 criteria passed"));
}

#[test]
fn verify_fault_injection_names_failure() {
    let o = run(&["verify", "--filter", "4", "--fault", "corrupt-cstar"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(
        out.contains("criterion  4 [kernel] L2 norm and C*: FAIL"),
        "{out}"
    );
}

#[test]
fn verify_unknown_filter_is_usage_error() {
    assert_eq!(
        run(&["verify", "--filter", "nothing-matches"])
            .status
            .code(),
        Some(2)
    );
}
