//! Symbolic execution of one program under a harness.

mod config;
mod exec;
mod replay;
mod state;

pub use config::*;
pub use exec::{disassembly_lines, execute_complete, vocabulary, ExecError, Explorer};
pub use replay::{concrete_inputs, replay, ConcreteInputs, Replay};
pub use state::*;
