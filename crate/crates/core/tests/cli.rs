use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padic-kelvin"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report-schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_schema(report: &Value) {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let errors: Vec<String> = validator.iter_errors(report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");
}

fn strip_timings(mut v: Value) -> Value {
    v["timings"] = Value::Null;
    v
}

#[test]
fn kelvin_report_is_all_zero_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.json");
    let o = run(&["verify", "kelvin", "--p", "2", "--n", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_schema(&v);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 100);
    assert!(checks.iter().all(|c| c["symbolic_residual"] == "0" && c["oracle_agreement"] == true));
    assert_eq!(v["summary"]["failed"], 0);
}

#[test]
fn inverse_round_trip_report() {
    let o = run(&["verify", "inverse", "--p", "3", "--n", "2", "--no-oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_schema(&v);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["symbolic_residual"] == "0"));
}

#[test]
fn fourier_report_within_tolerance() {
    let o = run(&["verify", "fourier", "--p", "2", "--n", "2", "--alpha", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_schema(&v);
    let worst = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["check_id"].as_str().unwrap().starts_with("fourier/spectral/"))
        .flat_map(|c| c["numeric_residuals"].as_array().unwrap().clone())
        .map(|r| r["value"].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-9, "{worst}");
    assert!(v["context"]["conventions"].as_array().unwrap().iter().any(|c| c.as_str().unwrap().contains("exp(2 pi i")));
}

#[test]
fn reports_are_deterministic() {
    for suite in ["chain", "arithmetic", "harmonic"] {
        let args = ["verify", suite, "--p", "3", "--n", "2", "--seed", "11"];
        let a: Value = serde_json::from_slice(&run(&args).stdout).unwrap();
        let b: Value = serde_json::from_slice(&run(&args).stdout).unwrap();
        assert_schema(&a);
        assert_eq!(strip_timings(a), strip_timings(b), "{suite}");
    }
    let a: Value = serde_json::from_slice(&run(&["verify", "chain", "--seed", "1"]).stdout).unwrap();
    let b: Value = serde_json::from_slice(&run(&["verify", "chain", "--seed", "2"]).stdout).unwrap();
    assert_ne!(strip_timings(a), strip_timings(b));
}

#[test]
fn eigen_subcommand_reports_eigenvalue() {
    let o = run(&["eigen", "--p", "2", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_schema(&v);
    assert_eq!(v["context"]["suite"], "eigen");
    let lambda: kelvin_core::symbolic::SymbolicScalar = v["extra"][0]["eigenvalue"].as_str().unwrap().parse().unwrap();
    assert_eq!(lambda, "1/s".parse().unwrap());
}

#[test]
fn csv_and_text_formats() {
    let o = run(&["verify", "arithmetic", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let mut rd = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rd.headers().unwrap().len(), 7);
    let rows: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| &r[6] == "true"));
    let o = run(&["verify", "arithmetic", "--format", "text"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("5 checks, 5 passed, 0 failed"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify", "kelvin", "--p", "4"][..],
        &["verify", "kelvin", "--n", "9"],
        &["verify", "kelvin", "--n", "1"],
        &["verify", "kelvin", "--alpha", "2"],
        &["verify", "chain", "--alpha", "-1"],
        &["verify", "kelvin", "--precision", "7"],
        &["verify", "kelvin", "--format", "xml"],
        &["verify", "nonsense"],
        &["frobnicate"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}
