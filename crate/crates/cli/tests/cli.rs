use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fermalg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermalg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn strip_times(v: &mut Value) {
    v["wall_time_ms"] = Value::from(0);
    for s in v["suites"].as_array_mut().unwrap() {
        s["wall_time_ms"] = Value::from(0);
    }
}

#[test]
fn explain_cites_references() {
    let o = fermalg(&["explain", "car"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("Thm 5.2") && text.contains("eq. (CAR)"), "{text}");
    assert!(stdout(&fermalg(&["explain", "weyl"])).contains("eq. (Weyl)"));
    let list = stdout(&fermalg(&["explain"]));
    assert!(list.lines().count() > 30);
}

#[test]
fn explain_unknown_lists_suggestions() {
    let o = fermalg(&["explain", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("did you mean") && err.contains("available checks"), "{err}");
}

#[test]
fn grassmann_suite_counts_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = fermalg(&["check", "--suite", "grassmann", "--n-max", "3", "--trials", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = read_report(&out);
    let s = &r["suites"][0];
    assert_eq!(s["suite"], "grassmann");
    // Σ_{n≤3} (2·2ⁿ + 4·4ⁿ + 8ⁿ) basis checks plus 100 decompositions
    assert_eq!(s["attempted"], 955 + 100);
    assert_eq!(s["failed"], 0);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = fermalg(&["check", "--suite", "grassmann,functionals", "--seed", "7", "--trials", "30", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        let mut v = read_report(&out);
        strip_times(&mut v);
        serde_json::to_string_pretty(&v).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn corrupted_model_names_validate_model_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = fermalg(&["model", "lattice:T=2,L=1"]);
    assert!(o.status.success());
    let mut desc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // field point 0 lies before every source point, so S_R must vanish there
    desc["S_R"][0][0] = Value::from("1");
    let path = dir.path().join("broken.json");
    std::fs::write(&path, serde_json::to_string(&desc).unwrap()).unwrap();
    let out = dir.path().join("report.json");
    let o = fermalg(&["check", "--suite", "car", "--model", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = read_report(&out);
    let failures = r["suites"][0]["failures"].as_array().unwrap();
    let hit = failures.iter().find(|f| f["op"] == "validate_model/retardation").expect("retardation failure");
    let ce = hit["counterexample"].as_str().unwrap();
    assert!(ce.contains("S_R(x=0, y="), "{ce}");
    assert_eq!(hit["seed"], 0);
    assert!(!hit["paper_ref"].as_str().unwrap().is_empty());
}

#[test]
fn malformed_descriptor_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"label\": \"x\",\n  \"rank\": [\n}").unwrap();
    let o = fermalg(&["check", "--suite", "car", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json:3:10"), "{}", stderr(&o));
}

#[test]
fn model_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let desc = stdout(&fermalg(&["model", "lattice:T=1,L=1"]));
    std::fs::write(dir.path().join("tiny.json"), desc).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fermalg"))
        .args(["check", "--suite", "car", "--trials", "3", "--model", "tiny.json", "--json"])
        .env("FERMALG_MODEL_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["model"], "tiny.json");
    assert_eq!(r["suites"][0]["failed"], 0);
}

#[test]
fn bad_arguments_are_rejected() {
    assert_eq!(fermalg(&["check", "--suite", "grassman"]).status.code(), Some(2));
    assert_eq!(fermalg(&["check", "--suite", "wick", "--interaction", "sextic"]).status.code(), Some(2));
    assert_eq!(fermalg(&["check", "--suite", "car", "--model", "lattice:T=0,L=1"]).status.code(), Some(2));
}
