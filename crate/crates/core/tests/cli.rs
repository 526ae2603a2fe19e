mod common;

use std::process::{Command, Output};

use common::samples_dir;
use duet::report::ReportDocument;
use duet::symexec::{strip_comments, HarnessConfig};

fn duet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_duet")).args(args).output().expect("binary runs")
}

fn sample(rel: &str) -> String {
    samples_dir().join(rel).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn assemble_then_run() {
    let dir = tempfile::tempdir().unwrap();
    let czb = dir.path().join("echo.czb");
    let o = duet(&["asm", &sample("echo/echo.asm"), czb.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&czb).unwrap(), std::fs::read(sample("echo/echo.czb")).unwrap());

    let back = dir.path().join("echo.asm");
    assert!(duet(&["asm", czb.to_str().unwrap(), back.to_str().unwrap()]).status.success());
    assert!(std::fs::read_to_string(&back).unwrap().contains("halt"));

    let o = duet(&["run", &sample("echo/echo.json")]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["terminals"].as_array().unwrap().len(), 1);
    assert_eq!(v["side"], "pre");
}

#[test]
fn compare_identical_succeeds_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = duet(&["compare", &sample("identical/identical.json"), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("all pairs equivalent"));
    let doc = ReportDocument::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.pairs.len(), doc.trees.pre.leaves.len());
}

#[test]
fn compare_with_counterexamples_exits_two() {
    let o = duet(&["compare", &sample("instrumented/broken.json")]);
    assert_eq!(o.status.code(), Some(2));
    let o = duet(&["compare", &sample("instrumented/instrumented.json")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bad_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"pre": "missing.asm", "post": "missing.asm"}"#).unwrap();
    let o = duet(&["compare", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
}

#[test]
fn template_parses_once_comments_are_stripped() {
    let o = duet(&["template"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.trim_start().starts_with("//")));
    let cfg: HarnessConfig = serde_json::from_str(&strip_comments(&text)).unwrap();
    assert_eq!(cfg.solver_budget_bits, 24);
}

#[test]
fn oracle_agrees_on_a_sample() {
    let o = duet(&["oracle", &sample("branching/branching.json")]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("checked 256 inputs"));
}
