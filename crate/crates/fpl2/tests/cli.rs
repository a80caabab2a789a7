use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fpl2-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_fpl2"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .env("FPL2_OUT_DIR", dir)
        .output()
        .unwrap()
}

#[test]
fn exit_codes() {
    let d = scratch("codes");
    assert_eq!(run(&d, &["spectrum"], "{").status.code(), Some(2));
    assert_eq!(run(&d, &["spectrum"], r#"{"n": 1, "gamma": 1}"#).status.code(), Some(2));
    assert_eq!(run(&d, &["spectrum"], r#"{"n": 1}"#).status.code(), Some(2));
    assert_eq!(run(&d, &["check-algebra"], r#"{"n": 2.5}"#).status.code(), Some(3));
    assert_eq!(run(&d, &["spectrum"], r#"{"n": 1, "width": 9}"#).status.code(), Some(3));
    assert_eq!(run(&d, &["bethe"], r#"{"n": -0.5, "width": 2}"#).status.code(), Some(3));
}

#[test]
fn oracle_row() {
    let d = scratch("oracle");
    let out = run(&d, &["oracle"], r#"{"n": 1.0, "width": 2, "rows": 1}"#);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(d.join("oracle.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let rel: f64 = row[9].parse().unwrap();
    assert!(rel < 1e-10);
    assert_eq!(row[7], "708");
}

#[test]
fn bethe_seed_from_previous_output() {
    let d = scratch("seed");
    assert!(run(&d, &["bethe"], r#"{"n": 1.0, "width": 2}"#).status.success());
    let first: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("bethe.json")).unwrap()).unwrap();
    assert!(first["solutions"][0]["residual"].as_f64().unwrap() < 1e-12);
    std::fs::rename(d.join("bethe.json"), d.join("seed.json")).unwrap();
    let seed = d.join("seed.json");
    let out = run(&d, &["bethe", "--seed-from", seed.to_str().unwrap()], r#"{"n": 1.0, "width": 3}"#);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let next: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("bethe.json")).unwrap()).unwrap();
    assert_eq!(next["solutions"][0]["counts"], serde_json::json!([3, 3, 3]));
}

#[test]
fn scaling_row() {
    let d = scratch("scaling");
    assert!(run(&d, &["scaling"], r#"{"n": 1.0}"#).status.success());
    let csv = std::fs::read_to_string(d.join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,L_min,L_max,f0,c_est,c_closed,abs_err");
    let err: f64 = csv.lines().nth(1).unwrap().split(',').nth(6).unwrap().parse().unwrap();
    assert!(err < 0.05);
}

#[test]
fn check_algebra_passes_at_n_one() {
    let d = scratch("algebra");
    let out = run(&d, &["check-algebra"], r#"{"n": 1.0, "width": 2}"#);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("check_algebra.csv")).unwrap();
    assert!(csv.contains("quoted_entries_printed_gauge,info"));
    assert!(!csv.contains(",fail,"));
}
