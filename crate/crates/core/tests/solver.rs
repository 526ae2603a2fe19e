mod common;

use std::collections::BTreeSet;

use common::{holds_all, random_pred};
use duet::solver::{
    brute_force_sat, is_sat, is_sat_with_budget, mk_lit, to_smtlib, HitKind, Outcome, Query, SatResult, SatSolver,
    Solver, SolverError,
};
use duet::term::{Term, Var};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pool(rng: &mut impl Rng, vars: &[Var], n: usize) -> Vec<Term> {
    (0..n).map(|_| random_pred(rng, vars, 2)).collect()
}

fn cnf_sat(n: u32, clauses: &[Vec<(u32, bool)>]) -> bool {
    (0..1u32 << n).any(|bits| {
        clauses
            .iter()
            .all(|c| c.iter().any(|&(v, neg)| (bits >> v & 1 == 1) != neg))
    })
}

#[test]
fn budget_counts_only_clause_variables() {
    let x = Term::var("x", 32);
    let q = Query::new(vec![x.eq_(&Term::constant(5, 32))]);
    assert!(matches!(
        is_sat_with_budget(&q, 24),
        Err(SolverError::BudgetExceeded { bits: 32, limit: 24 })
    ));
    let y = Term::var("y", 8);
    let q = Query::with_domain(vec![y.eq_(&Term::constant(5, 8))], [Var::new("y", 8), Var::new("z", 32)].into_iter().collect());
    assert!(is_sat_with_budget(&q, 24).unwrap().is_sat());
}

#[test]
fn repeated_query_hits_the_model_cache() {
    let s = Solver::new(24);
    let x = Term::var("x", 8);
    let q = Query::new(vec![x.ult(&Term::constant(4, 8))]);
    assert_eq!(s.check(&q).unwrap().1, HitKind::Solved);
    assert_eq!(s.check(&q).unwrap().1, HitKind::ModelHit);
}

#[test]
fn superset_of_a_core_hits_the_core_cache() {
    let s = Solver::new(24);
    let x = Term::var("x", 8);
    let lo = x.ult(&Term::constant(4, 8));
    let hi = Term::constant(10, 8).ult(&x);
    assert!(!s.solve(&Query::new(vec![lo.clone(), hi.clone()])).unwrap().is_sat());
    let y = Term::var("y", 8).eq_(&Term::constant(1, 8));
    let (r, kind) = s.check(&Query::new(vec![y, hi, lo])).unwrap();
    assert_eq!(kind, HitKind::CoreHit);
    assert_eq!(r, SatResult::Unsat(vec![1, 2]));
}

#[test]
fn smtlib_rendering_declares_each_variable() {
    let x = Term::var("x", 8);
    let q = Query::new(vec![x.add(&x).eq_(&Term::constant(4, 8))]);
    let text = to_smtlib(&q);
    assert!(text.contains("(set-logic QF_BV)"));
    assert_eq!(text.matches("(declare-fun |x| () (_ BitVec 8))").count(), 1);
    assert!(text.contains("(check-sat)"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdcl_agrees_with_truth_tables(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=10u32);
        let clauses: Vec<Vec<(u32, bool)>> = (0..rng.gen_range(1..=40))
            .map(|_| (0..rng.gen_range(1..=3)).map(|_| (rng.gen_range(0..n), rng.gen_bool(0.5))).collect())
            .collect();
        let mut s = SatSolver::new();
        for _ in 0..n {
            s.new_var();
        }
        for c in &clauses {
            let lits: Vec<_> = c.iter().map(|&(v, neg)| mk_lit(v, neg)).collect();
            s.add_clause(&lits);
        }
        let out = s.solve(&[]);
        prop_assert_eq!(out == Outcome::Sat, cnf_sat(n, &clauses));
        if out == Outcome::Sat {
            prop_assert!(clauses.iter().all(|c| c.iter().any(|&(v, neg)| s.model_value(v) != neg)));
        }
    }

    /// A caching solver gives the same verdicts as a fresh one and as
    /// enumeration, every core hit is unsat, every model hit satisfies its
    /// query, and caching never solves more often.
    #[test]
    fn caches_preserve_verdicts(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = vec![Var::new("a", 8), Var::new("f", 1)];
        let domain: BTreeSet<Var> = vars.iter().cloned().collect();
        let clauses = pool(&mut rng, &vars, 8);
        let cached = Solver::new(24);
        let plain = Solver::without_caches(24);
        for _ in 0..40 {
            let pick: Vec<Term> = (0..rng.gen_range(1..=4)).map(|_| clauses[rng.gen_range(0..8)].clone()).collect();
            let q = Query::with_domain(pick.clone(), domain.clone());
            let want = brute_force_sat(&q).unwrap().is_sat();
            let (r, kind) = cached.check(&q).unwrap();
            prop_assert_eq!(r.is_sat(), want);
            prop_assert_eq!(plain.solve(&q).unwrap().is_sat(), want);
            match (&r, kind) {
                (SatResult::Sat(m), _) => prop_assert!(holds_all(&pick, &m.completed(&domain))),
                (SatResult::Unsat(core), _) => {
                    prop_assert!(!brute_force_sat(&q.subset(core)).unwrap().is_sat());
                }
            }
        }
        prop_assert!(cached.stats().solved <= plain.stats().solved);
        let st = cached.stats();
        prop_assert_eq!(st.queries, st.solved + st.core_hits + st.model_hits);
    }

    #[test]
    fn unsat_results_carry_unsat_cores(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = vec![Var::new("a", 8), Var::new("b", 8)];
        let n = rng.gen_range(1..6);
        let clauses = pool(&mut rng, &vars, n);
        let q = Query::with_domain(clauses, vars.iter().cloned().collect());
        if let SatResult::Unsat(core) = is_sat(&q).unwrap() {
            prop_assert!(core.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(!brute_force_sat(&q.subset(&core)).unwrap().is_sat());
        }
    }
}
