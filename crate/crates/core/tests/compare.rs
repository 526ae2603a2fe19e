mod common;

use std::collections::BTreeSet;

use common::{harness, sample};
use duet::compare::{align, classify_sets, compare, diff_pair, Classification, EditOp, ValueDiff, WrittenBy};
use duet::oracle::cross_check;
use duet::solver::Solver;
use duet::symexec::{replay, Side};
use duet::term::{eval, Assignment, Term, Var};
use proptest::prelude::*;
use serde_json::json;

fn two(pre: &str, post: &str, extra: serde_json::Value) -> duet::symexec::Harness {
    let mut cfg = json!({
        "pre": {"asm": pre},
        "post": {"asm": post},
        "inputs": [{"name": "x", "width": 8, "bind": {"reg": 1}}],
    });
    if let serde_json::Value::Object(m) = extra {
        for (k, v) in m {
            cfg[k] = v;
        }
    }
    harness(cfg)
}

fn threshold(n: u32) -> String {
    format!("const r2, {n}\ncmpltu r3, r1, r2\nbeqz r3, big\nconst r0, 1\nhalt\nbig: const r0, 2\nhalt")
}

#[test]
fn unsigned_thresholds_pair_three_ways() {
    let h = two(&threshold(10), &threshold(11), json!({"observables": {"registers": [{"reg": 0}]}}));
    let cr = compare(&h, &Solver::default()).unwrap();
    assert_eq!(cr.pairs.len(), 3);
    let small = |side: Side| {
        let run = cr.run(side);
        run.terminals
            .iter()
            .find(|s| replay(&h, side, &Assignment::new().with("x", 0)).block_history == s.block_history)
            .unwrap()
            .node_id
    };
    let (ps, qs) = (small(Side::Pre), small(Side::Post));
    let p = cr.pairs.iter().find(|p| p.pair.pre == ps && p.pair.post == qs).unwrap();
    assert_eq!(p.diff.exclusive.classification, Classification::PreRefinesPost);
    assert_eq!(p.diff.exclusive.post_only.as_ref().unwrap().get("x"), Some(10));
    // x = 10 takes the big path before and the small path after
    let split = cr.pairs.iter().find(|p| p.pair.pre != ps && p.pair.post == qs).unwrap();
    assert_eq!(split.pair.witness.get("x"), Some(10));
    assert!(split.diff.registers_differ());
    assert!(cross_check(&h, &cr).unwrap().ok());
}

#[test]
fn syntactically_equal_values_need_no_solver() {
    let asm = "add r0, r1, r1\nstore [r7+64], r0\nout 0, r0\nhalt";
    let h = two(asm, asm, json!({}));
    let solver = Solver::default();
    let cr = compare(&h, &solver).unwrap();
    assert_eq!(cr.pairs.len(), 1);
    assert!(cr.pairs[0].diff.observably_equal());
    let (s, t) = (&cr.pre.terminals[0], &cr.post.terminals[0]);
    let before = solver.stats().queries;
    let d = diff_pair(s, t, &cr.pairs[0].pair, &h.config.observables, &solver, &cr.domain).unwrap();
    assert!(d.observably_equal());
    // only the two classification queries
    assert_eq!(solver.stats().queries - before, 2);
}

#[test]
fn doubling_two_ways_is_equal() {
    let h = two(
        "add r0, r1, r1\nhalt",
        "const r2, 2\nmul r0, r1, r2\nhalt",
        json!({"observables": {"registers": [{"reg": 0}]}}),
    );
    let cr = compare(&h, &Solver::default()).unwrap();
    assert_eq!(cr.pairs[0].diff.registers[0].status, ValueDiff::Equal);

    let h = two(
        "add r0, r1, r1\nhalt",
        "const r2, 3\nmul r0, r1, r2\nhalt",
        json!({"observables": {"registers": [{"reg": 0}]}}),
    );
    let cr = compare(&h, &Solver::default()).unwrap();
    let ValueDiff::Differs { witness, pre_value, post_value } = &cr.pairs[0].diff.registers[0].status else {
        panic!("expected a difference");
    };
    let x = witness.get("x").unwrap();
    assert_eq!(*pre_value, 2 * x);
    assert_eq!(*post_value, 3 * x);
    assert_ne!(pre_value, post_value);
}

#[test]
fn classification_examples() {
    let x = Term::var("x", 8);
    let c = |n| Term::constant(n, 8);
    let domain: BTreeSet<Var> = [Var::new("x", 8)].into_iter().collect();
    let s = Solver::default();
    let lt10 = [x.ult(&c(10))];
    let lt20 = [x.ult(&c(20))];
    let mid = [c(5).ult(&x), x.ult(&c(15))];
    assert_eq!(classify_sets(&lt10, &lt10, &s, &domain).unwrap().classification, Classification::Equivalent);
    assert_eq!(classify_sets(&lt10, &lt20, &s, &domain).unwrap().classification, Classification::PreRefinesPost);
    assert_eq!(classify_sets(&lt20, &lt10, &s, &domain).unwrap().classification, Classification::PostRefinesPre);
    let e = classify_sets(&lt10, &mid, &s, &domain).unwrap();
    assert_eq!(e.classification, Classification::Overlapping);
    let pre_only = e.pre_only.unwrap().get("x").unwrap();
    let post_only = e.post_only.unwrap().get("x").unwrap();
    assert!(pre_only <= 5);
    assert!((10..15).contains(&post_only));
}

#[test]
fn harmless_off_by_one_satisfies_observables_agree() {
    let mut h = sample("branching/branching.json");
    h.config.property = Some(duet::symexec::PropertySpec::Named("observables-agree".into()));
    let cr = compare(&h, &Solver::default()).unwrap();
    assert_eq!(cr.counterexamples.as_deref(), Some(&[][..]));
    // the paths still differ at x = 10
    assert!(cr.pairs.iter().any(|p| p.diff.exclusive.classification != Classification::Equivalent));
}

#[test]
fn expression_property_reports_failing_inputs() {
    let mut h = sample("branching/branching.json");
    h.config.property = Some(duet::symexec::PropertySpec::Expr { expr: "pre_r0 != 10".into() });
    let cr = compare(&h, &Solver::default()).unwrap();
    let cex = cr.counterexamples.unwrap();
    assert!(!cex.is_empty());
    for c in &cex {
        assert!(c.witness.get("x").unwrap() <= 10);
        assert_eq!(replay(&h, Side::Pre, &c.witness).state.regs[0], 10);
    }
}

#[test]
fn store_on_one_side_is_flagged() {
    let h = two("store [r7+64], r1\nhalt", "halt", json!({}));
    let cr = compare(&h, &Solver::default()).unwrap();
    let m = &cr.pairs[0].diff.memory;
    assert_eq!(m.iter().map(|d| d.addr).collect::<Vec<_>>(), [64, 65, 66, 67]);
    assert!(m.iter().all(|d| d.written_by == WrittenBy::Pre && d.kind() == "written-by-one-side"));
}

#[test]
fn inserted_output_aligns_as_an_insertion() {
    let h = two(
        "const r2, 1\nout 0, r2\nout 0, r1\nhalt",
        "const r2, 1\nout 0, r2\nconst r3, 2\nout 0, r3\nout 0, r1\nhalt",
        json!({}),
    );
    let cr = compare(&h, &Solver::default()).unwrap();
    let e = &cr.pairs[0].diff.effects[0];
    let ops: Vec<EditOp> = e.aligned.iter().map(|a| a.op).collect();
    assert_eq!(ops, [EditOp::Keep, EditOp::Insert, EditOp::Keep]);
    assert!(e.differs.is_some());
}

fn lcs(a: &[u8], b: &[u8]) -> usize {
    match (a.split_first(), b.split_first()) {
        (Some((x, ra)), Some((y, rb))) if x == y => 1 + lcs(ra, rb),
        (Some((_, ra)), Some((_, rb))) => lcs(ra, b).max(lcs(a, rb)),
        _ => 0,
    }
}

proptest! {
    #[test]
    fn alignment_is_a_longest_common_subsequence(
        a in prop::collection::vec(0u8..3, 0..8),
        b in prop::collection::vec(0u8..3, 0..8),
    ) {
        let steps = align(&a, &b);
        let left: Vec<usize> = steps.iter().filter_map(|s| s.0).collect();
        let right: Vec<usize> = steps.iter().filter_map(|s| s.1).collect();
        prop_assert_eq!(left, (0..a.len()).collect::<Vec<_>>());
        prop_assert_eq!(right, (0..b.len()).collect::<Vec<_>>());
        let mut keeps = 0;
        for s in &steps {
            if let (Some(i), Some(j)) = s {
                prop_assert_eq!(a[*i], b[*j]);
                keeps += 1;
            }
        }
        prop_assert_eq!(keeps, lcs(&a, &b));
    }

    /// Every register witness really separates the two values.
    #[test]
    fn register_witnesses_separate_values(k in 0u32..256, m in 0u32..256) {
        let h = two(
            &format!("const r2, {k}\nadd r0, r1, r2\nhalt"),
            &format!("const r2, {m}\nxor r0, r1, r2\nhalt"),
            json!({"observables": {"registers": [{"reg": 0, "width": 8}]}}),
        );
        let cr = compare(&h, &Solver::default()).unwrap();
        let differs = (0..256u32).any(|x| (x + k) & 0xff != x ^ m);
        match &cr.pairs[0].diff.registers[0].status {
            ValueDiff::Equal => prop_assert!(!differs),
            ValueDiff::Differs { witness, .. } => {
                let x = witness.get("x").unwrap();
                prop_assert!((x + k) & 0xff != x ^ m);
                let t = Term::var("x", 8).add(&Term::constant(k & 0xff, 8));
                prop_assert_eq!(eval(&t, witness).unwrap(), (x + k) & 0xff);
            }
        }
    }
}
