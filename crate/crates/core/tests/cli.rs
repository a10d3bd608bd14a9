use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn verlinde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verlinde")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(args: &[&str]) -> String {
    let mut all = args.to_vec();
    all.push("--json");
    let o = verlinde(&all);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).expect("json output");
    v["result"]["value"].as_str().expect("value string").to_string()
}

#[test]
fn documented_examples() {
    assert_eq!(value(&["compute", "--group", "SO(3)", "--level", "4", "--genus", "2"]), "5");
    assert_eq!(value(&["compute", "--group", "SU(2)", "--level", "1", "--genus", "2", "--mode", "closed"]), "4");
    assert_eq!(value(&["compute", "--group", "SU(2)", "--level", "2", "--markings", "1;1"]), "1");
}

#[test]
fn su2_against_closed_form() {
    // at genus one the index counts the level weights
    for k in 1..=6u32 {
        assert_eq!(value(&["compute", "--group", "SU(2)", "--level", &k.to_string(), "--genus", "1"]), (k + 1).to_string());
    }
}

#[test]
fn exit_codes() {
    assert_eq!(verlinde(&["compute", "--group", "SO(3", "--level", "4"]).status.code(), Some(2));
    assert_eq!(verlinde(&["compute", "--group", "SU(2)"]).status.code(), Some(2));
    assert_eq!(verlinde(&["compute", "--group", "SO(3)", "--level", "2", "--genus", "1"]).status.code(), Some(3));
    assert_eq!(verlinde(&["compute", "--group", "SU(2)", "--level", "2", "--markings", "3"]).status.code(), Some(2));
}

#[test]
fn json_is_deterministic_and_parses() {
    let args = ["compute", "--group", "SU(3)/Z3", "--level", "3", "--genus", "2", "--json", "--breakdown"];
    let a = verlinde(&args);
    let b = verlinde(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["center_subgroup_order"], 3);
    assert_eq!(v["mode"], "ns");
}

#[test]
fn csv_output_has_header() {
    let o = verlinde(&["compute", "--group", "SU(2)", "--level", "3", "--genus", "2", "--csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("value"));
    assert!(lines.next().is_some());
}

#[test]
fn adjoint_level_table() {
    let o = verlinde(&["levels", "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().expect("rows");
    assert!(rows.len() >= 8);
    let find = |t: &str| rows.iter().find(|r| r["lie_type"] == t).unwrap_or_else(|| panic!("{t}"))["computed"].clone();
    assert_eq!(find("A1"), 4);
    assert_eq!(find("E6"), 3);
    assert_eq!(find("E7"), 4);
}

#[test]
fn sweep_from_config() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sweep.toml");
    let o = verlinde(&["sweep", "--config", cfg.to_str().unwrap(), "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let so3 = rows.iter().find(|r| r["group"] == "SO(3)" && r["levels"][0] == 4 && r["genus"] == 2).unwrap();
    assert_eq!(so3["value"], "5");
}

#[test]
fn sweep_rejects_unknown_keys() {
    let dir = std::env::temp_dir().join(format!("verlinde-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "groups = [\"SU(2)\"]\nlevel = [2]\n").unwrap();
    assert_eq!(verlinde(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
