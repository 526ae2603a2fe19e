//! Satisfiability, unsat cores and the session caches.

use duet::solver::{minimize_core, Query, SatResult, Solver};
use duet::term::Term;

fn main() {
    let x = Term::var("x", 8);
    let y = Term::var("y", 8);
    let c = |n| Term::constant(n, 8);
    let clauses = vec![x.ult(&c(10)), y.eq_(&c(3)), c(20).ult(&x)];

    let solver = Solver::new(24);
    match solver.solve(&Query::new(clauses.clone())).unwrap() {
        SatResult::Sat(m) => println!("sat: {m}"),
        SatResult::Unsat(core) => println!("unsat, core clauses {core:?}"),
    }
    println!("irreducible core: {:?}", minimize_core(&Query::new(clauses.clone())).unwrap());

    // A superset of a known core is answered from the cache.
    let mut more = clauses.clone();
    more.push(y.ult(&c(100)));
    solver.solve(&Query::new(more)).unwrap();
    let sat = vec![x.ult(&c(10))];
    solver.solve(&Query::new(sat.clone())).unwrap();
    solver.solve(&Query::new(sat)).unwrap();
    println!("{:?}", solver.stats());
}
