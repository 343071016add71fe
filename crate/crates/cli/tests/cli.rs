use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const NETWORK_ONE: &str = "x! . 0 | x?() . out!1 . 0 + y?() . out!2 . 0";
const MIXED_BASE: &str = "x! . 1! . 0 + y?() . 2! . 0";

fn pisym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pisym")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn labels(report: &Value) -> Vec<Vec<String>> {
    report["rounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["labels"].as_array().unwrap().iter().map(|l| l.as_str().unwrap().to_string()).collect())
        .collect()
}

#[test]
fn symexec_on_network_one() {
    let dir = TempDir::new().unwrap();
    let base = write(&dir, "p.pi", NETWORK_ONE);
    let out = pisym(&["--json", "symexec", "--base", s(&base), "--perm", "x>y,y>x", "--degree", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], "pisym-report/1");
    assert_eq!(r["verdict"], "complete");
    assert_eq!(r["truncated"], false);
    assert_eq!(labels(&r), vec![vec!["tau", "tau"], vec!["out!1", "out!1"]]);
    assert_eq!(r["sigmaChain"].as_array().unwrap().len(), 3);
}

#[test]
fn find_symexec_refutes_mixed_network() {
    let dir = TempDir::new().unwrap();
    let base = write(&dir, "m.pi", MIXED_BASE);
    let out = pisym(&[
        "--json", "find-symexec", "--base", s(&base), "--perm", "x>y,y>x,1>2,2>1", "--degree", "2", "--restrict", "x,y",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["verdict"], "no");
}

#[test]
fn symexec_rejects_mixed_choice() {
    let dir = TempDir::new().unwrap();
    let base = write(&dir, "m.pi", MIXED_BASE);
    let out = pisym(&["symexec", "--base", s(&base), "--perm", "x>y,y>x,1>2,2>1", "--degree", "2", "--restrict", "x,y"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn explore_nil_has_one_empty_execution() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "z.pi", "0");
    let out = pisym(&["--json", "explore", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let execs = json(&out)["executions"].as_array().unwrap().clone();
    assert_eq!(execs.len(), 1);
    assert_eq!(execs[0]["labels"].as_array().unwrap().len(), 0);
    assert_eq!(execs[0]["maximal"], true);
}

#[test]
fn parse_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.pi", "0 + 0");
    let out = pisym(&["parse", s(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1:"));
}

#[test]
fn bound_outputs_print_with_parentheses() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "b.pi", "new x . a!x . x! . 0");
    let r = json(&pisym(&["--json", "steps", s(&f)]));
    let labels: Vec<&str> = r["steps"].as_array().unwrap().iter().map(|t| t["label"].as_str().unwrap()).collect();
    assert_eq!(labels, vec!["a!(x)"]);
}

#[test]
fn checkers_map_verdicts_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let v1 = "a?() . slave! . 0 + a! . leader! . 0";
    let one = write(&dir, "v1.pi", v1);
    let two = write(&dir, "v1v1.pi", &format!("({v1}) | ({v1})"));
    assert_eq!(pisym(&["check", "leader-election", s(&two)]).status.code(), Some(0));
    assert_eq!(pisym(&["check", "leader-election", s(&one)]).status.code(), Some(2));
    let m = "a?() . 0 + a! . check";
    let one = write(&dir, "m.pi", m);
    let two = write(&dir, "mm.pi", &format!("({m}) | ({m})"));
    assert_eq!(pisym(&["check", "must-succeed", s(&two)]).status.code(), Some(0));
    assert_eq!(pisym(&["check", "must-succeed", s(&one)]).status.code(), Some(2));
    let deep = write(&dir, "deep.pi", "tau . tau . tau . check");
    assert_eq!(pisym(&["check", "must-succeed", s(&deep), "--max-depth", "2"]).status.code(), Some(3));
    assert_eq!(pisym(&["check", "can-step", "--mode", "tau", s(&one)]).status.code(), Some(2));
    assert_eq!(pisym(&["check", "can-step", "--mode", "tau", s(&two)]).status.code(), Some(0));
}

#[test]
fn confluence_precondition_and_counterexample() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "v3.pi", "a! . 0 + b?() . 0");
    assert_eq!(pisym(&["confluence", s(&f)]).status.code(), Some(1));
    assert_eq!(pisym(&["confluence", "--unchecked", s(&f)]).status.code(), Some(2));
    let g = write(&dir, "ok.pi", "a! . 0 | b?() . 0");
    assert_eq!(pisym(&["confluence", s(&g)]).status.code(), Some(0));
}

#[test]
fn reports_replay_through_subdivision() {
    let dir = TempDir::new().unwrap();
    let base = write(&dir, "p.pi", "a!b . 0 | a?(z) . z! . 0");
    let rep = dir.path().join("ex.json");
    let out = pisym(&["--report", s(&rep), "symexec", "--base", s(&base), "--degree", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let out = pisym(&["--json", "subdivide", "--exec", s(&rep), "--degree-prime", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(labels(&r), vec![vec!["tau"], vec!["b!"]]);
    // σ^1 is not the identity for a swapping network.
    let base = write(&dir, "n1.pi", NETWORK_ONE);
    pisym(&["--report", s(&rep), "symexec", "--base", s(&base), "--perm", "x>y,y>x", "--degree", "2"]);
    assert_eq!(pisym(&["subdivide", "--exec", s(&rep), "--degree-prime", "1"]).status.code(), Some(1));
}

#[test]
fn tampered_reports_do_not_replay() {
    let dir = TempDir::new().unwrap();
    let base = write(&dir, "p.pi", "a!b . 0 | a?(z) . z! . 0");
    let rep = dir.path().join("ex.json");
    pisym(&["--report", s(&rep), "symexec", "--base", s(&base), "--degree", "2"]);
    let text = std::fs::read_to_string(&rep).unwrap().replace("\"b!\"", "\"c!\"");
    std::fs::write(&rep, text).unwrap();
    assert_eq!(pisym(&["subdivide", "--exec", s(&rep), "--degree-prime", "1"]).status.code(), Some(1));
}

#[test]
fn network_descriptor_files() {
    let dir = TempDir::new().unwrap();
    let net = write(
        &dir,
        "n.toml",
        &format!("base = \"{NETWORK_ONE}\"\nperm = \"x>y,y>x\"\ndegree = 2\nrestrict = []\n"),
    );
    let out = pisym(&["--json", "symnet", "--net", s(&net)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        json(&out)["input"]["term"],
        "(x! . 0 | x?() . out!1 . 0 + y?() . out!2 . 0) | (y! . 0 | y?() . out!1 . 0 + x?() . out!2 . 0)"
    );
    let bad = write(&dir, "bad.toml", "base = \"a! . 0\"\nperm = \"a>b\"\ndegree = 2\n");
    assert_eq!(pisym(&["symnet", "--net", s(&bad)]).status.code(), Some(1));
}

#[test]
fn stdin_is_accepted() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pisym"))
        .args(["parse", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(b"b?() . 0 | a! . 0").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("canonical: a! . 0 | b?() . 0"));
}
