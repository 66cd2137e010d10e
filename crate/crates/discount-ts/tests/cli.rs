//! End-to-end tests of the `discount-ts` binary: subcommands, exit codes,
//! output schemas and byte-level reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_discount-ts")
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

fn toy_config(out_dir: &Path) -> String {
    format!(
        r#"{{
  "model_kind": "toy",
  "theta": 0.05,
  "vol": 0.0,
  "r0": 0.03,
  "sim": {{"dt": 0.001, "n_steps": 100, "n_paths": 3, "seed": 7}},
  "output": {{"directory": "{}", "formats": ["csv", "json"]}},
  "tau_grid": [0.0, 1.0, 10.0]
}}"#,
        out_dir.display()
    )
}

fn simplex_config(out_dir: &Path, zero_drift: bool) -> String {
    format!(
        r#"{{
  "model_kind": "simplex_factors",
  "kappa": [0.01],
  "theta": [0.03],
  "q": [0.2],
  "gamma0": 0.005,
  "z0": [0.3],
  "sim": {{"dt": 0.001, "n_steps": 1000, "n_paths": 5000, "seed": 42}},
  "output": {{"directory": "{}", "formats": ["json"]}},
  "validate": {{"grid_dt": 0.02, "grid_steps": 20, "grid_paths": 1000, "grid_vol": 1e-4, "zero_drift": {zero_drift}}}
}}"#,
        out_dir.display()
    )
}

#[test]
fn curve_writes_expected_csv_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "toy.json", &toy_config(&out));
    let result = run(&["curve", "--config", &cfg], &[]);
    assert!(result.status.success(), "{result:?}");
    let csv = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "tau,h,discount,bond,forward,short_rate");
    assert_eq!(lines.len(), 4);
    let tau10: Vec<&str> = lines[3].split(',').collect();
    let bond: f64 = tau10[3].parse().unwrap();
    assert!((bond - 0.763918).abs() < 5e-7);

    let first = std::fs::read(out.join("curve.csv")).unwrap();
    let result = run(&["curve", "--config", &cfg], &[]);
    assert!(result.status.success());
    assert_eq!(first, std::fs::read(out.join("curve.csv")).unwrap());
}

#[test]
fn validate_passes_and_is_byte_identical_across_thread_caps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "model.json", &simplex_config(&out, false));

    let result = run(
        &["validate", "--config", &cfg],
        &[("DISCOUNT_TS_THREADS", "1")],
    );
    assert!(
        result.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&result.stdout),
        String::from_utf8_lossy(&result.stderr)
    );
    let single = std::fs::read(out.join("report.json")).unwrap();

    let result = run(
        &["validate", "--config", &cfg],
        &[("DISCOUNT_TS_THREADS", "4")],
    );
    assert!(result.status.success());
    let multi = std::fs::read(out.join("report.json")).unwrap();
    assert_eq!(single, multi, "report.json depends on the thread cap");

    // The text table and stdout both carry the battery.
    let table = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(table.contains("mc_bond_price"));
    assert!(table.contains("positivity_scan"));
}

#[test]
fn validate_drift_zeroed_probe_exits_nonzero_but_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "probe.json", &simplex_config(&out, true));
    let result = run(&["validate", "--config", &cfg], &[]);
    assert_eq!(result.status.code(), Some(1));
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    let failed = parsed
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["check_name"].as_str().unwrap().contains("drift_condition")
            && !r["passed"].as_bool().unwrap());
    assert!(failed, "drift check should be the failing row: {report}");
}

#[test]
fn simulate_explosion_exits_2_with_blow_up_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "grid.json",
        &format!(
            r#"{{
  "model_kind": "grid",
  "initial_curve": {{"kind": "constant", "level": 0.5}},
  "vol": {{"kind": "zero"}},
  "nodes": 301,
  "sim": {{"dt": 0.01, "n_steps": 300, "n_paths": 1, "seed": 0}},
  "output": {{"directory": "{}", "formats": ["csv", "json"]}}
}}"#,
            out.display()
        ),
    );
    let result = run(&["simulate", "--config", &cfg], &[]);
    assert_eq!(result.status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap())
            .unwrap();
    let time = summary["explosion"]["time"].as_f64().unwrap();
    assert!(time > 1.9 && time < 2.1, "blow-up at {time}");
}

#[test]
fn simulate_seed_override_changes_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "factors.json",
        &format!(
            r#"{{
  "model_kind": "simplex_factors",
  "kappa": [0.1, -0.2],
  "theta": [0.05, 0.05],
  "q": [0.3, 0.4],
  "z0": [0.2, 0.3],
  "sim": {{"dt": 0.01, "n_steps": 100, "n_paths": 5, "seed": 1}},
  "output": {{"directory": "{}", "formats": ["csv", "json"]}}
}}"#,
            out.display()
        ),
    );
    assert!(run(&["simulate", "--config", &cfg], &[]).status.success());
    let base = std::fs::read(out.join("paths.csv")).unwrap();
    assert!(run(&["simulate", "--config", &cfg], &[]).status.success());
    assert_eq!(base, std::fs::read(out.join("paths.csv")).unwrap());
    assert!(run(&["simulate", "--config", &cfg, "--seed", "2"], &[])
        .status
        .success());
    assert_ne!(base, std::fs::read(out.join("paths.csv")).unwrap());
}

#[test]
fn spde_tabulates_flow_and_flags_supercritical_times() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "spde.json",
        &format!(
            r#"{{
  "model_kind": "grid",
  "initial_curve": {{"kind": "exponential", "scale": 0.05, "rate": 0.05}},
  "vol": {{"kind": "zero"}},
  "nodes": 21,
  "sim": {{"dt": 0.25, "n_steps": 20, "n_paths": 1, "seed": 0}},
  "output": {{"directory": "{}", "formats": ["csv"]}},
  "spde": {{"times": [0.0, 2.0, 8.0], "x_max": 4.0}}
}}"#,
            out.display()
        ),
    );
    let result = run(&["spde", "--config", &cfg], &[]);
    assert!(result.status.success());
    let csv = std::fs::read_to_string(out.join("spde.csv")).unwrap();
    assert!(csv.starts_with("t,x,psi\n"));
    // Stationary curve: psi(t, 0) identical across the three times.
    let at_x0: Vec<f64> = csv
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(1) == Some("0"))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(at_x0.len(), 3);
    for v in &at_x0 {
        assert!((v - at_x0[0]).abs() < 1e-12);
    }

    let bad = write_config(
        dir.path(),
        "spde_bad.json",
        &format!(
            r#"{{
  "model_kind": "grid",
  "initial_curve": {{"kind": "constant", "level": 0.5}},
  "vol": {{"kind": "zero"}},
  "nodes": 21,
  "sim": {{"dt": 0.25, "n_steps": 20, "n_paths": 1, "seed": 0}},
  "output": {{"directory": "{}", "formats": ["csv"]}},
  "spde": {{"times": [2.5], "x_max": 1.0}}
}}"#,
            out.display()
        ),
    );
    let result = run(&["spde", "--config", &bad], &[]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn config_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    // Missing file.
    let result = run(&["curve", "--config", "/nonexistent.json"], &[]);
    assert_eq!(result.status.code(), Some(64));
    // Unparseable JSON.
    let bad = write_config(dir.path(), "bad.json", "{not json");
    let result = run(&["curve", "--config", &bad], &[]);
    assert_eq!(result.status.code(), Some(64));
    // Wrong model kind for the subcommand.
    let out = dir.path().join("out");
    let toy = write_config(dir.path(), "toy.json", &toy_config(&out));
    let result = run(&["validate", "--config", &toy], &[]);
    assert_eq!(result.status.code(), Some(64));
}
