use std::path::Path;
use std::process::{Command, Output};

use progavg_core::series::p_prime_trunc;
use progavg_core::PolynomialSpec;

fn progavg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_progavg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn rho_table() {
    let out = progavg(&["rho", "--ell", "2", "--u", "1", "--p-max", "10"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "p,rho\n2,1\n3,0\n5,2\n7,0\n");
}

#[test]
fn series_row_matches_library() {
    let out = progavg(&["series", "--ell", "2", "--u", "1", "--cutoff", "10000", "--variant", "sigma-prime"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u,value,method,cutoff");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    let expected = p_prime_trunc(&PolynomialSpec::new(2, 1).unwrap(), 1e4).unwrap().value;
    assert_eq!(fields[1], format!("{expected:.11e}"));
    assert_eq!(fields[2], "EULER_PRODUCT");
}

#[test]
fn series_range_and_dirichlet_sum() {
    let out = progavg(&["series", "--ell", "3", "--u", "-2:2", "--cutoff", "100", "--method", "dirichlet-sum"]);
    assert!(!out.status.success(), "u = 0 is not a valid shift");
    assert_eq!(out.status.code(), Some(2));
    let out = progavg(&["series", "--ell", "3", "--u", "1:4", "--cutoff", "100", "--method", "dirichlet-sum"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);
    assert!(stdout(&out).contains("DIRICHLET_SUM"));
}

#[test]
fn verify_local_passes() {
    let out = progavg(&["verify", "--suite", "local"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("suite,status,checks,mismatches\nlocal,PASS,"));
    assert!(text.trim_end().ends_with(",0"));
}

#[test]
fn exit_codes() {
    let range = progavg(&["expsum", "--ell", "2", "--z", "1e13", "--alpha", "1/2", "--which", "I"]);
    assert_eq!(range.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&range.stderr).contains("expsum-range"));
    let usage = progavg(&["rho", "--ell", "2"]);
    assert_eq!(usage.status.code(), Some(2));
    let bad_alpha = progavg(&["expsum", "--ell", "2", "--z", "16", "--alpha", "x/y", "--which", "I"]);
    assert_eq!(bad_alpha.status.code(), Some(2));
    let arcs = progavg(&["arcs", "--x", "1000", "--exponent", "2"]);
    assert_eq!(arcs.status.code(), Some(3));
}

#[test]
fn manifest_lists_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let per_u = dir.path().join("per_u.csv");
    let status = progavg(&[
        "variance",
        "--ell",
        "2",
        "--x",
        "10000",
        "--y",
        "10",
        "--cutoff",
        "1000",
        "--out",
        out.to_str().unwrap(),
        "--per-u",
        per_u.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["ell", "y", "X", "S", "normalized", "n_obstructed", "per_u_quantiles"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    let csv = std::fs::read_to_string(&per_u).unwrap();
    assert!(csv.starts_with("u,count,prediction,error\n"));
    assert_eq!(csv.lines().count(), 11);
    let manifest = read_manifest(&dir.path().join("report.json.manifest.json"));
    assert_eq!(manifest["command"], "variance");
    assert_eq!(manifest["exit_code"], 0);
    assert!(manifest["error"].is_null());
    let paths: Vec<&str> = manifest["output_paths"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(paths, [out.to_str().unwrap(), per_u.to_str().unwrap()]);
    assert_eq!(manifest["parameters"]["command"]["variance"]["y"], 10);
}

#[test]
fn manifest_written_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = dir.path().join("m.json");
    let out = progavg(&[
        "count",
        "--ell",
        "2",
        "--x",
        "10000",
        "--y",
        "5",
        "--cutoff",
        "0.5",
        "--manifest",
        manifest_path.to_str().unwrap(),
    ]);
    let manifest = read_manifest(&manifest_path);
    assert_eq!(manifest["exit_code"].as_i64(), out.status.code().map(i64::from));
    if !out.status.success() {
        assert!(manifest["error"].is_string());
    }
    let out = progavg(&[
        "count",
        "--ell",
        "2",
        "--x",
        "9223372036854775807",
        "--y",
        "5",
        "--manifest",
        manifest_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let manifest = read_manifest(&manifest_path);
    assert_eq!(manifest["exit_code"], 3);
    assert!(manifest["error"].as_str().unwrap().contains("guard"));
}

#[test]
fn count_output_is_reproducible() {
    let args = ["count", "--ell", "3", "--x", "1000000", "--y", "12", "--cutoff", "10000"];
    let a = progavg(&args);
    let b = progavg(&[&args[..], &["--threads", "3"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("u,count,prediction,error\n"));
}

#[test]
fn expsum_and_arcs() {
    let out = progavg(&["expsum", "--ell", "2", "--z", "16", "--alpha", "0", "--which", "Iell", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["re"], 4.0);
    assert_eq!(v["terms"], 4);
    let out = progavg(&["arcs", "--x", "1000000", "--exponent", "0.5", "--alpha", "1/2,0.3", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classifications"][0]["class"], "MAJOR");
    assert_eq!(v["classifications"][0]["q"], 2);
    assert_eq!(v["classifications"][1]["class"], "MINOR");
}
