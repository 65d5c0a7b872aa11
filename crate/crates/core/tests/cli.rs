//! End-to-end checks of the `qfigrowth` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qfigrowth");

const QUBIT: &str = r#"
seed = 1
[scenario]
name = "dephasing_qubit"
epsilon = 1.0
gamma_d = 0.5
[grid]
t_end = 2.0
points = 81
[[outputs]]
csv = "out.csv"
svg = "out.svg"
"#;

fn run_config(dir: &Path, text: &str) -> Output {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    Command::new(BIN).args(["run", "--config"]).arg(&path).output().unwrap()
}

#[test]
fn run_writes_curve_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), QUBIT);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,qfi_sim,qfi_rate_sim,bound_optimized,bound_hls,bound_hnls,bound_prior_linear,bound_prior_quadratic"
    );
    assert_eq!(lines.count(), 81);
    let svg = fs::read_to_string(dir.path().join("out.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn run_is_deterministic() {
    let random = r#"
seed = 9
[scenario]
name = "random"
dim = 3
channels = 2
[grid]
t_end = 1.0
points = 21
[[outputs]]
csv = "out.csv"
"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_config(a.path(), random).status.success());
    assert!(run_config(b.path(), random).status.success());
    let x = fs::read(a.path().join("out.csv")).unwrap();
    let y = fs::read(b.path().join("out.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn empty_scenario_name_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), &QUBIT.replace("\"dephasing_qubit\"", "\"\""));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn unknown_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), &QUBIT.replace("gamma_d = 0.5", "gamma_d = 0.5\ngama = 1.0"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = Command::new(BIN).args(["run", "--config", "/nonexistent/run.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_two() {
    let out = Command::new(BIN).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(BIN).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn selftest_group_passes() {
    let out = Command::new(BIN).args(["selftest", "--only", "lambert"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn loose_rank_tolerance_fails_continuity() {
    let out = Command::new(BIN).args(["selftest", "--rank-tol", "1e-2", "--only", "continuity"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
