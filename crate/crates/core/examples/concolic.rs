//! Drive both programs with concrete inputs until a coverage goal is met.

use std::path::Path;

use duet::concolic::execute_concolic;
use duet::solver::Solver;
use duet::symexec::Harness;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("samples/branching/branching.json");
    let mut h = Harness::load(&path).expect("sample harness");
    for termination in ["coverage:0.5", "cyclomatic", "complete"] {
        h.config.heuristics.termination = termination.into();
        let r = execute_concolic(&h, &Solver::new(h.config.solver_budget_bits)).unwrap();
        println!(
            "{termination}: {} inputs, {} + {} terminals, stopped: {}",
            r.log.len(),
            r.pre.terminals.len(),
            r.post.terminals.len(),
            r.stop_reason
        );
        for e in &r.log {
            println!("  round {} from {}: {}", e.round, e.source, e.input);
        }
    }
}
