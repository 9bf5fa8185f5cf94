use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gindex"))
        .args(args)
        .env_remove("GINDEX_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gindex-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn record_has_schema_keys() {
    let out = gindex(&["contact-check"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["command", "config", "results", "checks", "duration_ms", "version"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "contact-check");
    for c in v["checks"].as_array().unwrap() {
        for key in ["name", "measured", "tolerance", "pass"] {
            assert!(c.get(key).is_some());
        }
    }
}

#[test]
fn seeded_runs_are_identical_up_to_duration() {
    let args = ["cs-sandbox", "--trials", "30", "--seed", "9"];
    let mut a = json(&gindex(&args));
    let mut b = json(&gindex(&args));
    a["duration_ms"] = Value::Null;
    b["duration_ms"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    assert_eq!(gindex(&["gamma-trace-suite"]).status.code(), Some(3), "missing seed");
    assert_eq!(gindex(&["chern", "--n", "7"]).status.code(), Some(3), "odd grid");
    assert_eq!(gindex(&["chern", "--bogus"]).status.code(), Some(2));
    assert_eq!(gindex(&[]).status.code(), Some(2));
    assert_eq!(gindex(&["chern", "--suite", "cs"]).status.code(), Some(2));
    assert_eq!(gindex(&["--suite", "nope", "--seed", "1"]).status.code(), Some(3));
    let blocker = scratch("blocked").join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub/out.json");
    assert_eq!(gindex(&["reeb", "--out", out.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn failing_check_exits_one() {
    // a tolerance no floating point Chern integral can meet
    let out = gindex(&["chern", "--n", "32", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let head = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "chern.error").unwrap();
    assert_eq!(head["pass"], false);
    assert_eq!(head["tolerance"], 1e-30);
}

#[test]
fn csv_table_for_index_sweep() {
    let out = gindex(&["index", "--ks", "1,2", "--ls=-1,0,1", "--n", "32", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains('k') && header.contains('l'));
    assert_eq!(lines.count(), 6);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = scratch("config");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "n = 32\nks = [2]\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let v = json(&gindex(&["contact-check", "--config", cfg]));
    assert_eq!(v["config"]["n"], 32);
    assert_eq!(v["results"]["forms"].as_array().unwrap().len(), 1);

    let v = json(&gindex(&["contact-check", "--config", cfg, "--n", "16", "--ks", "1,3"]));
    assert_eq!(v["config"]["n"], 16);
    assert_eq!(v["results"]["forms"].as_array().unwrap().len(), 2);
}

#[test]
fn unknown_config_key_is_rejected() {
    let cfg = scratch("badcfg").join("run.toml");
    std::fs::write(&cfg, "grid = 32\n").unwrap();
    assert_eq!(gindex(&["reeb", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn relative_out_resolves_against_env_dir() {
    let dir = scratch("outdir");
    let status = Command::new(env!("CARGO_BIN_EXE_gindex"))
        .args(["reeb", "--out", "nested/reeb.json"])
        .env("GINDEX_OUT_DIR", &dir)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.join("nested/reeb.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "reeb");
}
