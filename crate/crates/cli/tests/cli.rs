use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn radcom(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radcom"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_scene(dir: &Path, name: &str, json: &str) {
    fs::write(dir.join(name), json).unwrap();
}

const SMALL: &str = r#"{"n": 17, "k": 2, "pulse_length": 8}"#;

#[test]
fn synth_without_radars_writes_one_row_per_subcarrier() {
    let dir = tempfile::tempdir().unwrap();
    write_scene(dir.path(), "s.json", r#"{"n": 17, "k": 2, "pulse_length": 8, "num_radars": 0}"#);
    let out = radcom(&["synth", "--scene", "s.json", "--out", "o.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("o.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,re,im"));
    assert_eq!(lines.count(), 17);
}

#[test]
fn solve_without_observation_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_scene(dir.path(), "s.json", SMALL);
    let out = radcom(&["solve", "--scene", "s.json", "--algo", "csan_cg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn invalid_scene_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_scene(dir.path(), "bad.json", r#"{"n": 0}"#);
    let out = radcom(&["synth", "--scene", "bad.json", "--out", "o.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    write_scene(dir.path(), "junk.json", "{ not json");
    let out = radcom(&["synth", "--scene", "junk.json", "--out", "o.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_and_certify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write_scene(dir.path(), "s.json", SMALL);
    let d = dir.path();
    assert!(radcom(&["synth", "--scene", "s.json", "--seed", "4", "--out", "o.csv"], d).status.success());
    let out = radcom(
        &["solve", "--scene", "s.json", "--seed", "4", "--obs", "o.csv", "--algo", "csl1", "--out", "r.json"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(result["algorithm"], "csl1");
    assert_eq!(result["symbols"].as_array().unwrap().len(), 17);

    let out = radcom(
        &["solve", "--scene", "s.json", "--seed", "4", "--obs", "o.csv", "--algo", "csan_cg", "--solver", "admm"],
        d,
    );
    assert!(out.status.success());
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["algorithm"], "csan_admm");

    let out = radcom(
        &["certify", "--scene", "s.json", "--seed", "4", "--obs", "o.csv", "--points", "64", "--out", "c.csv"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.join("c.csv")).unwrap();
    assert!(csv.starts_with("tau,q_norm,q_over_lambda\n"));
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn observation_of_the_wrong_size_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_scene(d, "s.json", SMALL);
    write_scene(d, "big.json", r#"{"n": 33, "k": 2, "pulse_length": 8}"#);
    assert!(radcom(&["synth", "--scene", "big.json", "--out", "o.csv"], d).status.success());
    let out = radcom(&["solve", "--scene", "s.json", "--obs", "o.csv", "--algo", "iter0"], d);
    assert_eq!(out.status.code(), Some(2));
}

fn mc_config(dir: &Path) {
    let config = r#"{
        "scenario": "tiny",
        "sweep": "sir",
        "values": [-5.0, 5.0],
        "trials": 3,
        "seed": 11,
        "algorithms": ["iter0", "csl1", "csan_cg"],
        "base": {"n": 17, "k": 2, "pulse_length": 8}
    }"#;
    fs::write(dir.join("cfg.json"), config).unwrap();
}

#[test]
fn mc_writes_fixed_schema_and_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    mc_config(d);
    for (out, threads) in [("a", "1"), ("b", "2")] {
        let o = radcom(&["mc", "--config", "cfg.json", "--threads", threads, "--out", out], d);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(d.join("a/results.csv")).unwrap();
    let b = fs::read(d.join("b/results.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sweep,algo,iteration,ser_mean,ser_ci"));
    // 2 sweep values x 3 algorithms x 11 trace entries
    assert_eq!(lines.clone().count(), 66);
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        let mean: f64 = fields[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&mean));
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario"], "tiny");
    assert_eq!(summary["points"].as_array().unwrap().len(), 2);
}

#[test]
fn mc_rejects_an_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("cfg.json"), r#"{"trials": 0}"#).unwrap();
    let o = radcom(&["mc", "--config", "cfg.json", "--out", "x"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trial"));
    let o = radcom(&["mc", "--preset", "fig42"], d);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn preset_configs_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let o = radcom(&["mc", "--preset", "fig5a", "--trials", "7", "--print-config"], dir.path());
    assert!(o.status.success());
    let cfg: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cfg["trials"], 7);
    assert_eq!(cfg["base"]["sir_db"], -5.0);
    assert_eq!(cfg["base"]["n"], 65);
}
