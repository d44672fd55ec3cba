use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinbeam"))
        .args(args)
        .arg("--output")
        .arg(out)
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn pair_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["pair", "--n", "14"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("pair.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# schema_version=1 config_hash="));
    assert!(lines.next().unwrap().starts_with("k,n,"));
    assert_eq!(lines.count(), 1);
    let m = manifest(dir.path());
    assert_eq!(m["command"], "pair");
    assert_eq!(m["timestamp"], 0);
    assert_eq!(m["files"][0], "pair.csv");
}

#[test]
fn manifest_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    assert!(run(&["map", "--probe-orders", "3,5"], &first).status.success());
    let snapshot = dir.path().join("snapshot.toml");
    std::fs::write(&snapshot, manifest(&first)["config"].as_str().unwrap()).unwrap();
    let second = dir.path().join("b");
    let o = run(&["map", "--config", snapshot.to_str().unwrap()], &second);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(first.join("map.csv")).unwrap(), std::fs::read(second.join("map.csv")).unwrap());
}

#[test]
fn json_format_and_db_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["sweep", "--count", "3", "--format", "json", "--db"], dir.path()).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(v["columns"].as_array().unwrap().iter().any(|c| c == "S_NF_dB"));
}

#[test]
fn dumps_and_wigner_succeed() {
    let dir = tempfile::tempdir().unwrap();
    for (args, file) in [
        (&["dump-chi"][..], "chi.csv"),
        (&["dump-transfer", "--method", "eigen"], "transfer.csv"),
        (&["wigner", "--samples", "11"], "wigner.csv"),
    ] {
        let out = dir.path().join(args[0]);
        let o = run(args, &out);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(file).is_file());
    }
    let wigner = std::fs::read_to_string(dir.path().join("wigner/wigner.csv")).unwrap();
    assert_eq!(wigner.lines().count(), 2 + 11 * 11);
}

#[test]
fn validate_passes_and_injected_fault_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["validate"], &dir.path().join("ok"));
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = run(&["validate", "--inject-fault"], &dir.path().join("bad"));
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let builtin = include_str!("../../../configs/default.toml");
    let cases = [
        ("unknown_key.toml", builtin.replace("[physical]", "[physical]\nbogus = 1")),
        ("negative_pressure.toml", builtin.replace("pressure_bar = 0.5", "pressure_bar = -0.5")),
        ("syntax.toml", "[physical\n".to_string()),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let o = run(&["pair", "--config", path.to_str().unwrap()], &dir.path().join("out"));
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let missing = run(&["pair", "--config", "/nonexistent/twinbeam.toml"], &dir.path().join("out"));
    assert_eq!(missing.status.code(), Some(2));
    let channel = run(&["pair", "--n", "15"], &dir.path().join("out"));
    assert_eq!(channel.status.code(), Some(2));
}
