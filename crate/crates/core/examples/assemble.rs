//! Assemble a program, round-trip it through the container format and run it.

use std::collections::BTreeMap;

use duet::isa::{assemble, container, disassemble, run_concrete, NoMonitor, RunOptions};

const SOURCE: &str = "
    in r1, 0          ; read one byte
    addi r1, r1, 1
    out 0, r1
    halt
";

fn main() {
    let program = assemble(SOURCE).expect("valid assembly");
    let bytes = container::encode(&program);
    println!("container: {} bytes", bytes.len());
    let decoded = container::decode(&bytes).expect("valid container");
    print!("{}", disassemble(&decoded));

    let inputs = BTreeMap::from([(0, vec![b'A'])]);
    let run = run_concrete(&decoded, &inputs, [0; 8], &BTreeMap::new(), &RunOptions::default(), &mut NoMonitor);
    println!("terminal: {:?} after {} steps", run.terminal, run.steps);
    println!("channel 0: {:?}", run.state.channels_out.get(&0));
}
