use std::collections::BTreeSet;

use super::{Query, SatResult, SolverError};
use crate::term::{mask, Assignment, Var};

pub const ORACLE_BUDGET_BITS: u32 = 20;

/// Exhaustive enumeration. Variables are visited in name order, the first
/// variable varying fastest, each from 0 upwards. An unsat verdict cites
/// every clause.
pub fn brute_force_sat(q: &Query) -> Result<SatResult, SolverError> {
    q.validate()?;
    let bits = q.input_bits();
    if bits > ORACLE_BUDGET_BITS {
        return Err(SolverError::BudgetExceeded {
            bits,
            limit: ORACLE_BUDGET_BITS,
        });
    }
    let mut used: BTreeSet<Var> = BTreeSet::new();
    for c in &q.clauses {
        used.extend(c.vars());
    }
    let used: Vec<Var> = used.into_iter().collect();
    for a in all_assignments(&used) {
        if q.satisfied_by(&a) {
            return Ok(SatResult::Sat(a.completed(&q.vars)));
        }
    }
    Ok(SatResult::Unsat((0..q.clauses.len()).collect()))
}

/// Every assignment to `vars`, the first variable varying fastest.
pub fn all_assignments(vars: &[Var]) -> impl Iterator<Item = Assignment> + '_ {
    let bits: u32 = vars.iter().map(|v| v.width as u32).sum();
    assert!(bits < 64, "too many bits to enumerate");
    (0u64..(1u64 << bits)).map(move |n| {
        let mut a = Assignment::new();
        let mut rest = n;
        for v in vars {
            a.insert(v, (rest & mask(v.width) as u64) as u32);
            rest >>= v.width;
        }
        a
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Term;

    #[test]
    fn examples_agree_with_definitions() {
        let x = Term::var("x", 8);
        let c = |v| Term::constant(v, 8);
        let q = Query::new(vec![x.ult(&c(5)), c(2).ult(&x)]);
        assert_eq!(brute_force_sat(&q).unwrap().model().unwrap().get("x"), Some(3));
        let q = Query::new(vec![x.eq_(&c(1)), x.eq_(&c(2))]);
        assert_eq!(brute_force_sat(&q).unwrap(), SatResult::Unsat(vec![0, 1]));
        assert!(brute_force_sat(&Query::new(vec![])).unwrap().is_sat());
        let v = Term::var("v", 1);
        let m = brute_force_sat(&Query::new(vec![v])).unwrap();
        assert_eq!(m.model().unwrap().get("v"), Some(1));
    }

    #[test]
    fn budget() {
        let a = Term::var("a", 16);
        let b = Term::var("b", 8);
        let q = Query::new(vec![a.eq_(&b.zx(16).unwrap())]);
        assert!(matches!(
            brute_force_sat(&q),
            Err(SolverError::BudgetExceeded { bits: 24, limit: 20 })
        ));
    }
}
