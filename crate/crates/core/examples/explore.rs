//! Explore every path of one program and print its terminal states.

use std::path::Path;

use duet::solver::Solver;
use duet::symexec::{execute_complete, replay, Harness, Side};
use duet::term::pretty;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("samples/branching/branching.json");
    let h = Harness::load(&path).expect("sample harness");
    let run = execute_complete(&h, Side::Pre, &Solver::new(h.config.solver_budget_bits)).unwrap();
    println!("{} blocks, cyclomatic {}, {} terminals", run.blocks, run.cyclomatic, run.terminals.len());
    for s in &run.terminals {
        let pc: Vec<String> = s.constraints.iter().map(pretty).collect();
        let concrete = replay(&h, Side::Pre, &s.witness);
        println!(
            "  #{} {}: r0 = {}  when [{}]  (witness {} gives r0 = {})",
            s.node_id,
            s.terminal.as_ref().unwrap().name(),
            pretty(&s.regs[0]),
            pc.join(", "),
            s.witness,
            concrete.state.regs[0]
        );
    }
}
