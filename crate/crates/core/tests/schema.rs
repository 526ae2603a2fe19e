mod common;

use std::path::Path;

use common::{sample, samples_dir};
use duet::compare::compare;
use duet::report::build_report;
use duet::solver::Solver;
use duet::symexec::{strip_comments, template};
use serde_json::{json, Value};

fn validator(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(v: &jsonschema::Validator, doc: &Value, what: &str) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{what}: {errors:#?}");
}

fn harness_files() -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for dir in std::fs::read_dir(samples_dir()).unwrap() {
        for f in std::fs::read_dir(dir.unwrap().path()).unwrap() {
            let p = f.unwrap().path();
            if p.extension().is_some_and(|e| e == "json") {
                out.push(p);
            }
        }
    }
    out
}

#[test]
fn sample_harnesses_and_template_conform() {
    let v = validator("harness.schema.json");
    let files = harness_files();
    assert!(files.len() >= 9);
    for p in files {
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_valid(&v, &doc, &p.display().to_string());
    }
    let doc: Value = serde_json::from_str(&strip_comments(&template())).unwrap();
    assert_valid(&v, &doc, "template");
}

#[test]
fn harness_schema_rejects_mistakes() {
    let v = validator("harness.schema.json");
    let ok = json!({"pre": "a.asm", "post": {"asm": "halt"}});
    assert!(v.is_valid(&ok));
    for bad in [
        json!({"pre": "a.asm"}),
        json!({"pre": "a.asm", "post": "b.asm", "loop_bnd": 3}),
        json!({"pre": "a.asm", "post": "b.asm", "inputs": [{"name": "x", "width": 4}]}),
        json!({"pre": "a.asm", "post": "b.asm", "heuristics": {"termination": "coverage:2"}}),
        json!({"pre": "a.asm", "post": "b.asm", "directives": {"pre": [{"kind": "trace"}]}}),
    ] {
        assert!(!v.is_valid(&bad), "{bad}");
    }
}

#[test]
fn reports_conform() {
    let v = validator("report.schema.json");
    for (rel, mode) in [
        ("branching/branching.json", "complete"),
        ("branching/branching.json", "concolic"),
        ("serialization/post.json", "complete"),
        ("instrumented/broken.json", "complete"),
        ("hooked/hooked.json", "complete"),
        ("loop_bound/loop_bound.json", "complete"),
    ] {
        let mut h = sample(rel);
        h.config.mode = serde_json::from_value(json!(mode)).unwrap();
        let doc = build_report(&compare(&h, &Solver::new(h.config.solver_budget_bits)).unwrap(), &h);
        let value: Value = serde_json::from_str(&doc.to_json()).unwrap();
        assert_valid(&v, &value, &format!("{rel} ({mode})"));
    }
}
