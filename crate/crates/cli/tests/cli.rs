//! End-to-end checks of the `addcomb` binary surface.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_addcomb"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("addcomb-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn fft_roundtrip_through_files() {
    let f = scratch("f.json");
    let spec = scratch("spec.json");
    let back = scratch("back.json");
    std::fs::write(
        &f,
        r#"{"group":{"type":"cyclic","N":6},"values":[[1,0],[0.5,0.5],[0,-1],[0.25,0],[0,0],[-0.5,0.1]]}"#,
    )
    .unwrap();
    let out = bin()
        .args(["fft", "--in"])
        .arg(&f)
        .arg("--out")
        .arg(&spec)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin()
        .args(["fft", "--invert", "--in"])
        .arg(&spec)
        .arg("--out")
        .arg(&back)
        .output()
        .unwrap();
    assert!(out.status.success());
    let orig: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    let rt: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&back).unwrap()).unwrap();
    let a = orig["values"].as_array().unwrap();
    let b = rt["values"].as_array().unwrap();
    for (x, y) in a.iter().zip(b) {
        for k in 0..2 {
            let dx = x[k].as_f64().unwrap() - y[k].as_f64().unwrap();
            assert!(dx.abs() < 1e-9);
        }
    }
}

#[test]
fn freiman_check_reports_witness() {
    let phi = scratch("phi.json");
    std::fs::write(
        &phi,
        r#"{"domain":{"type":"vector","p":2,"n":2},"codomain":{"type":"vector","p":2,"n":2},"pairs":[[0,0],[1,1],[2,2],[3,0]]}"#,
    )
    .unwrap();
    let out = bin()
        .args(["freiman-check", "--order", "2", "--map"])
        .arg(&phi)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["is_hom"], false);
    assert!(v["witness"].is_array());
}

#[test]
fn run_emits_report_and_csv() {
    let report = scratch("report.jsonl");
    let csv = scratch("summary.csv");
    let out = bin()
        .args(["run", "--suite", "sieve", "--seed", "3", "--instances", "5"])
        .arg("--out")
        .arg(&report)
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6, "5 records plus a summary line");
    assert!(lines[5].contains("\"summary\""));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("instance,name,value\n"));
    assert!(csv_text.contains("lhs_over_rhs"));
}

#[test]
fn run_with_zero_instances_passes() {
    let out = bin()
        .args(["run", "--suite", "lift-f2", "--seed", "1", "--instances", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].contains("\"passed\":0"));
    assert!(lines[0].contains("\"failed\":0"));
}

#[test]
fn unknown_suite_is_an_error() {
    let out = bin()
        .args(["run", "--suite", "nope", "--seed", "1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn version_carries_build_digest() {
    let out = bin().arg("--version").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("build "), "got: {text}");
}
