mod common;

use common::{harness, render, seeded_program, single};
use duet::compare::compare_runs;
use duet::concolic::{execute_concolic, satisfies, step_children};
use duet::isa::{assemble, cyclomatic_complexity};
use duet::solver::Solver;
use duet::symexec::{execute_complete, replay, Side};
use duet::term::{Assignment, Term};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn x_input() -> serde_json::Value {
    json!([{"name": "x", "width": 8, "bind": {"reg": 1}}])
}

#[test]
fn children_follow_only_their_new_constraints() {
    let h = single("halt", json!({"inputs": x_input()}));
    let base = execute_complete(&h, Side::Pre, &Solver::default()).unwrap().terminals[0].clone();
    let x = Term::var("x", 8);
    let old = x.ult(&Term::constant(100, 8));
    let mut taken = base.clone();
    taken.constraints = vec![old.clone(), x.eq_(&Term::constant(5, 8))];
    let mut other = base.clone();
    other.constraints = vec![old, x.ne_(&Term::constant(5, 8))];
    // the input violates the inherited constraint, which is not re-checked
    let input = Assignment::new().with("x", 5);
    let (active, deferred) = step_children(1, vec![taken.clone(), other.clone()], &Assignment::new().with("x", 5));
    assert_eq!(active.len(), 1);
    assert_eq!(active[0].constraints, taken.constraints);
    assert_eq!(deferred.len(), 1);
    assert!(satisfies(&input, &taken.constraints));
    let (active, _) = step_children(1, vec![taken, other], &Assignment::new().with("x", 200));
    assert_eq!(active.len(), 1);
}

#[test]
fn full_coverage_with_a_dead_block_falls_back_to_exhaustion() {
    let asm = "
        beqz r1, a
        out 0, r1
        halt
    a:  const r2, 1
        bnez r2, b
        out 1, r1
    b:  halt";
    let h = single(asm, json!({"inputs": x_input(), "heuristics": {"termination": "coverage:1.0"}}));
    let r = execute_concolic(&h, &Solver::default()).unwrap();
    assert_eq!(r.stop_reason, "exhausted");
    let complete = execute_complete(&h, Side::Pre, &Solver::default()).unwrap();
    assert_eq!(r.pre.terminals.len(), complete.terminals.len());
}

#[test]
fn cyclomatic_stops_once_enough_terminals_exist() {
    let asm = "
        beqz r1, a
        out 0, r1
    a:  beqz r2, b
        out 0, r2
    b:  halt";
    let inputs = json!([
        {"name": "x", "width": 1, "bind": {"reg": 1}},
        {"name": "y", "width": 1, "bind": {"reg": 2}}
    ]);
    let h = single(asm, json!({"inputs": inputs, "heuristics": {"termination": "cyclomatic"}}));
    let m = cyclomatic_complexity(&assemble(asm).unwrap());
    assert_eq!(m, 3);
    let r = execute_concolic(&h, &Solver::default()).unwrap();
    assert!(r.pre.terminals.len() >= m && r.post.terminals.len() >= m);
    assert!(r.pre.terminals.len() < 4 || r.stop_reason == "exhausted");
    assert_eq!(r.log[0].source, "preconditions");
}

#[test]
fn complete_matches_exhaustive_terminals() {
    let h = common::sample("branching/branching.json");
    let r = execute_concolic(&h, &Solver::default()).unwrap();
    for side in [Side::Pre, Side::Post] {
        let full = execute_complete(&h, side, &Solver::default()).unwrap();
        let mut a: Vec<_> = r.run(side).terminals.iter().map(|s| s.block_history.clone()).collect();
        let mut b: Vec<_> = full.terminals.iter().map(|s| s.block_history.clone()).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Whatever the heuristics, every logged input's concrete path was
    /// explored on both sides and every terminal has a compatible partner.
    #[test]
    fn logged_inputs_replay_to_explored_terminals(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(8..24);
        let pre = seeded_program(&mut rng, len);
        let mut post = pre.clone();
        let at = 5 + rng.gen_range(0..len);
        post[at] = common::random_instruction(&mut rng, at, len + 5);
        let termination = ["complete", "coverage:0.5", "coverage:1.0", "cyclomatic"][rng.gen_range(0..4)];
        let candidate = ["trivial", "ngram:1", "ngram:2", "ngram:3"][rng.gen_range(0..4)];
        let h = harness(json!({
            "pre": {"asm": render(&pre)},
            "post": {"asm": render(&post)},
            "mode": "concolic",
            "heuristics": {"termination": termination, "candidate": candidate},
            "inputs": [
                {"name": "x", "width": 8, "bind": {"reg": 1}},
                {"name": "y", "width": 1, "bind": {"reg": 2}}
            ],
        }));
        let solver = Solver::default();
        let r = execute_concolic(&h, &solver).unwrap();
        for entry in &r.log {
            for side in [Side::Pre, Side::Post] {
                let concrete = replay(&h, side, &entry.input);
                let hit = r.run(side).terminals.iter().find(|s| satisfies(&entry.input, &s.constraints));
                let hit = hit.expect("logged input reaches an explored terminal");
                prop_assert_eq!(&hit.block_history, &concrete.block_history);
            }
        }
        let cr = compare_runs(&h, r.pre, r.post, Some(r.log), &solver).unwrap();
        prop_assert!(cr.orphans(Side::Pre).is_empty());
        prop_assert!(cr.orphans(Side::Post).is_empty());
    }
}
