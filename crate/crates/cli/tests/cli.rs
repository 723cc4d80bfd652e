use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const Z2: &str = r#"{"label":"Z^2","rank":2,"gram":[[{"num":"1","den":"1"},{"num":"0","den":"1"}],[{"num":"0","den":"1"},{"num":"1","den":"1"}]]}"#;
const Z1: &str = r#"{"rank":1,"gram":[[{"num":"1","den":"1"}]]}"#;
const FORMS: &str = "[[[1,0],[0,1]],[[2,1],[1,1]],[[2,1],[1,12]],[[4,1],[1,6]]]";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lattika"));
    c.env_remove("LATTIKA_BUDGET");
    c
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rr_check_on_z2() {
    let dir = TempDir::new().unwrap();
    let z2 = write(&dir, "z2.json", Z2);
    let out = run(&["rr-check", "--lattice", s(&z2)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["defect"].as_f64().unwrap().abs() <= v["bound"].as_f64().unwrap());
    assert!(v["h0_theta"]["bound"].is_number());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
    let out = run(&["enumerate", "--lattice", "x.json", "--radius-sq", "1", "--nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("--radius-sq"));
}

#[test]
fn missing_file_exits_one() {
    let out = run(&["invariants", "--lattice", "/nonexistent/lattice.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classify_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let forms = write(&dir, "forms.json", FORMS);
    let a = run(&["classify", "--forms", s(&forms)]);
    let b = run(&["classify", "--forms", s(&forms)]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["classes"], serde_json::json!([[0, 1], [2], [3]]));
    assert_eq!(v["inconclusive"], serde_json::json!([]));
}

#[test]
fn genus_pairs() {
    let dir = TempDir::new().unwrap();
    let forms = write(&dir, "forms.json", FORMS);
    let out = run(&["genus", "--forms", s(&forms), "--pairs", "2:3,0:2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v[0]["result"]["verdict"], "same");
    assert_eq!(v[1]["result"]["verdict"], "different");
    let out = run(&["genus", "--forms", s(&forms), "--pairs", "0:9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn uncertainty_writes_csv() {
    let dir = TempDir::new().unwrap();
    let z1 = write(&dir, "z1.json", Z1);
    let csv_path = dir.path().join("sweep.csv");
    let out = run(&["uncertainty", "--lattice", s(&z1), "--r", "1", "--t-grid", "0.5,1,4", "--out", s(&csv_path)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,lhs,lhs_bound,rhs,rhs_bound,count_primal,count_dual");
    assert_eq!(lines.count(), 3);
}

#[test]
fn csv_only_for_tables() {
    let dir = TempDir::new().unwrap();
    let z2 = write(&dir, "z2.json", Z2);
    let out = run(&["invariants", "--lattice", s(&z2), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["delta", "tau", "--n", "3", "--format", "csv"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "n,tau\n1,1\n2,-24\n3,252\n");
}

#[test]
fn budget_from_env_and_flag() {
    let dir = TempDir::new().unwrap();
    let z2 = write(&dir, "z2.json", Z2);
    let args = ["enumerate", "--lattice", s(&z2), "--radius-sq", "9"];
    let out = bin().args(args).env("LATTIKA_BUDGET", "5").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    let out = bin().args(args).args(["--budget", "1000"]).env("LATTIKA_BUDGET", "5").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["count"], 29);
}

#[test]
fn enumerate_lists_vectors() {
    let dir = TempDir::new().unwrap();
    let z2 = write(&dir, "z2.json", Z2);
    let v = json(&run(&["enumerate", "--lattice", s(&z2), "--radius-sq", "1", "--list"]));
    assert_eq!(v["count"], 5);
    assert_eq!(v["vectors"].as_array().unwrap().len(), 5);
    assert!(v["log_count"]["bound"].is_number());
}

#[test]
fn arakelov_and_mellin() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", r#"{"finite":{"2":1},"lambda":0.0}"#);
    let v = json(&run(&["arakelov", "h0", "--divisor", s(&d), "--ar"]));
    assert_eq!(v["h0_ar"]["h0"]["count"], 5);
    assert!(v["h0_theta"].is_null());
    let out = run(&["mellin", "verify", "--f", "symexp", "--s", "1,1.5,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn selftest_reports_every_criterion() {
    let out = run(&["selftest"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 12);
}
