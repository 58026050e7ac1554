use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn patlc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patlc")).args(args).output().expect("run patlc")
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p: PathBuf = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn example1() -> Value {
    json!({
        "alphabet": ["a", "b"],
        "symbols": [{"v": "x1"}, {"t": "a"}, {"v": "x2"}, {"t": "a"}, {"v": "x1"}],
        "mode": "E",
        "length": "2*x1 + x2 <= 5 and x2 >= 1"
    })
}

#[test]
fn match_prints_a_certificate() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "e1.json", &example1());
    let o = patlc(&["match", "--pattern", &p, "--word", "bbababb"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["substitution"], json!({"x1": "bb", "x2": "b"}));
}

#[test]
fn match_prints_no() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "e1.json", &example1());
    let o = patlc(&["match", "--pattern", &p, "--word", "bbaaaabb"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "NO");
    let o = patlc(&["--json", "match", "--pattern", &p, "--word", "aa"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o), json!({"match": false}));
}

#[test]
fn constraint_variable_outside_the_pattern_is_rejected() {
    let d = TempDir::new().unwrap();
    let mut v = example1();
    v["length"] = json!("x3 >= 1");
    let p = write(d.path(), "bad.json", &v);
    let o = patlc(&["match", "--pattern", &p, "--word", "aa"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("must occur in α"), "{err}");
}

#[test]
fn empty_pattern_is_rejected() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "empty.json", &json!({"alphabet": ["0"], "symbols": []}));
    let o = patlc(&["enumerate", "--pattern", &p, "--max-len", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonempty"));
}

#[test]
fn malformed_json_names_the_line() {
    let d = TempDir::new().unwrap();
    let p = d.path().join("broken.json");
    fs::write(&p, "{\n\"alphabet\": [\"0\"],\n\"symbols\": [\n").unwrap();
    let o = patlc(&["enumerate", "--pattern", p.to_str().unwrap(), "--max-len", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn zero_test_violation_is_rejected() {
    let d = TempDir::new().unwrap();
    let a = json!({"states": 1, "finals": [0], "delta": [{"from": 0, "c1": 0, "c2": 0, "to": [[0, -1, 0]]}]});
    let p = write(d.path(), "a.json", &a);
    let o = patlc(&["automaton", "--automaton", &p, "--run", "--max-steps", "2", "--max-counter", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero-test"));
}

#[test]
fn automaton_lists_computations_and_encodings() {
    let d = TempDir::new().unwrap();
    let a = json!({"states": 2, "finals": [1], "delta": [{"from": 0, "c1": 0, "c2": 0, "to": [[1, 1, 0]]}]});
    let p = write(d.path(), "a.json", &a);
    let o = patlc(&["automaton", "--automaton", &p, "--run", "--max-steps", "2", "--max-counter", "1"]);
    assert_eq!(stdout_json(&o), json!([[[0, 0, 0], [1, 1, 0]]]));
    let o = patlc(&["automaton", "--automaton", &p, "--valc", "--max-steps", "2", "--max-counter", "1"]);
    assert_eq!(stdout_json(&o), json!(["##0#0#0##00#00#0##"]));
}

#[test]
fn enumerate_lists_in_shortlex_order() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "p.json", &json!({"alphabet": ["a", "b"], "symbols": [{"v": "x1"}, {"t": "a"}], "mode": "E"}));
    let o = patlc(&["enumerate", "--pattern", &p, "--max-len", "2"]);
    assert_eq!(stdout_json(&o), json!(["a", "aa", "ba"]));
}

#[test]
fn compare_exit_codes() {
    let d = TempDir::new().unwrap();
    let x = write(d.path(), "x.json", &json!({"alphabet": ["a", "b"], "symbols": [{"v": "x1"}], "mode": "NE"}));
    let ax = write(d.path(), "ax.json", &json!({"alphabet": ["a", "b"], "symbols": [{"t": "a"}, {"v": "x2"}], "mode": "NE"}));
    let o = patlc(&["compare", "--mode", "incl", "--a", &x, "--b", &ax, "--max-len", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o), json!({"verdict": "counterexample", "word": "a", "side": "a"}));
    let o = patlc(&["compare", "--mode", "equiv", "--a", &x, "--b", &x, "--max-len", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["verdict"], "holds");
}

#[test]
fn reduce_then_compare_with_field_selectors() {
    let d = TempDir::new().unwrap();
    let inst = write(d.path(), "phi.json", &json!({"clauses": [[1, 1, 1], [-1, -1, -1]]}));
    let out = d.path().join("pair.json");
    let o = patlc(&["reduce", "--construction", "3sat", "--in", &inst, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let pair = out.to_str().unwrap();
    let o = patlc(&[
        "--compact",
        "compare",
        "--mode",
        "equiv",
        "--a",
        &format!("{pair}#left"),
        "--b",
        &format!("{pair}#right"),
        "--max-len",
        "14",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o), json!({"verdict": "counterexample", "word": "0^14", "side": "b"}));
}

#[test]
fn reduce_is_byte_stable() {
    let d = TempDir::new().unwrap();
    let a = json!({"states": 2, "finals": [1], "delta": [{"from": 0, "c1": 0, "c2": 0, "to": [[1, 1, 0]]}]});
    let p = write(d.path(), "a.json", &a);
    let first = patlc(&["reduce", "--construction", "appD", "--in", &p]);
    let second = patlc(&["reduce", "--construction", "appD", "--in", &p]);
    assert_eq!(first.status.code(), Some(0));
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn convert_removes_terminals() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "p.json", &json!({"alphabet": ["0", "#"], "symbols": [{"t": "0"}, {"t": "#"}]}));
    let o = patlc(&["convert", "--pattern", &p, "--to", "terminal-free"]);
    let v = stdout_json(&o);
    assert!(v["symbols"].as_array().unwrap().iter().all(|s| s.get("v").is_some()));
    let conv = write(d.path(), "c.json", &v);
    let o = patlc(&["enumerate", "--pattern", &conv, "--max-len", "4"]);
    assert_eq!(stdout_json(&o), json!(["0#"]));
}

#[test]
fn verify_reports_and_rejects_unknown_suites() {
    let o = patlc(&["verify", "--suite", "example1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 5);
    let o = patlc(&["verify", "--suite", "appE", "--max-vars", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = patlc(&["verify", "--suite", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(patlc(&["match", "--pattern", "x.json"]).status.code(), Some(2));
    assert_eq!(patlc(&["--threads", "0", "verify", "--suite", "example1"]).status.code(), Some(2));
    let o = patlc(&["automaton", "--automaton", "a.json", "--run", "--valc", "--max-steps", "1", "--max-counter", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
