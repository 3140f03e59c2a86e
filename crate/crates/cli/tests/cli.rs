use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = dioph_cli::run(std::iter::once("dioph").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn solve_lists_even_n() {
    let v = json(&["solve", "--theta", "1/2", "--psi", "power:0.1,0.5", "--phi", "zero", "--rho", "none", "--n-max", "10"]);
    assert_eq!(v["result"]["n"], serde_json::json!([2, 4, 6, 8, 10]));
    assert_eq!(v["tool"], "dioph");
    assert_eq!(v["config"]["params"]["theta"], "1/2");
}

#[test]
fn integer_multiple_exits_2() {
    let (code, _, err) = run(&["discrepancy", "--alpha", "1/2", "--L", "4", "--J", "-0.01,0.49", "--H", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("2·alpha is an integer"), "{err}");
}

#[test]
fn ps_scan_pairs() {
    let v = json(&["ps-scan", "--a1", "1", "--a2", "2", "--b2", "0", "--alpha", "3/2", "--n-max", "30"]);
    let pairs: Vec<(u64, u64)> = v["result"]["scan"][0]["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["x"].as_u64().unwrap(), p["y"].as_u64().unwrap()))
        .collect();
    assert_eq!(&pairs[..2], &[(2, 1), (22, 11)]);
    assert_eq!(pairs.len(), 6);
}

#[test]
fn config_defaults_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"seed": 3, "a1": 1, "a2": 2, "alpha": "3/2", "n_max": 30}"#).unwrap();
    let p = path.to_str().unwrap();
    let v = json(&["ps-scan", "--config", p]);
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["precision_bits"], 128);
    assert_eq!(v["config"]["format"], "json");
    assert_eq!(v["config"]["params"]["n-max"], "30");
    let v = json(&["ps-scan", "--config", p, "--seed", "7", "--n-max", "10"]);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["result"]["scan"][0]["count"], 2);
}

#[test]
fn every_unknown_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"alpha_max": "3", "zzz": 1, "alpha": "3/2"}"#).unwrap();
    let (code, _, err) = run(&["ps-quotients", "--config", path.to_str().unwrap(), "--n-max", "10"]);
    assert_eq!(code, 2);
    assert!(err.contains("\"alpha_max\"") && err.contains("\"zzz\""), "{err}");
}

#[test]
fn malformed_input_exits_2() {
    for args in [
        &["solve", "--theta", "1/2", "--psi", "power:0.1,0.5"][..],
        &["solve", "--theta", "abc", "--psi", "power:0.1,0.5", "--n-max", "5"],
        &["lattice-count", "--p", "9", "--Q", "10", "--L", "1", "--J", "0,1"],
        &["frobnicate"],
        &["ps-scan", "--a1", "2", "--a2", "4", "--alpha", "3/2", "--n-max", "5"],
        &["weyl", "--a", "1/4", "--n", "100", "--J", "0.3,0.6"],
        &["ps-scan", "--a1", "1", "--a2", "2", "--alpha", "3/2", "--n-max", "5", "--format", "xml"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn csv_has_header_and_config_column() {
    let (code, out, _) = run(&["ps-scan", "--a1", "1", "--a2", "2", "--alpha", "3/2", "--n-max", "30", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut r = csv::Reader::from_reader(out.as_bytes());
    let header = r.headers().unwrap().clone();
    assert_eq!(header.iter().next_back(), Some("config"));
    let rows: Vec<_> = r.records().map(Result::unwrap).collect();
    assert_eq!(&rows[0][1], "6");
    let echo: Value = serde_json::from_str(&rows[0][header.len() - 1]).unwrap();
    assert_eq!(echo["config"]["format"], "csv");
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let args = ["lattice-count", "--p", "3", "--Q", "4", "--qset", "4", "--L", "1", "--J", "0,2", "--oracle"];
    let (_, stdout, _) = run(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--output", path.to_str().unwrap()]);
    let (code, empty, _) = run(&with_out);
    assert_eq!(code, 0);
    assert!(empty.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
}

#[test]
fn worker_count_does_not_change_output() {
    let args = ["survey", "--psi", "power:0.1,0.5", "--samples", "12", "--n-max", "300", "--seed", "5"];
    let mut one = args.to_vec();
    one.extend(["--jobs", "1"]);
    let mut eight = args.to_vec();
    eight.extend(["--jobs", "8"]);
    assert_eq!(run(&one).1, run(&eight).1);
}

#[test]
fn precision_cap_env_and_flag() {
    let bin = env!("CARGO_BIN_EXE_dioph");
    let base = ["ps-scan", "--a1", "1", "--a2", "2", "--alpha", "3/2", "--n-max", "5"];
    let out = Command::new(bin).args(base).env("DIOPH_PRECISION_BITS", "512").output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["max_precision_bits"], 512);
    let out = Command::new(bin)
        .args(base)
        .args(["--max-precision-bits", "1024"])
        .env("DIOPH_PRECISION_BITS", "512")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["max_precision_bits"], 1024);
    let out = Command::new(bin).args(base).env("DIOPH_PRECISION_BITS", "lots").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
