//! Comparative symbolic execution for small binary patches.
//!
//! Two versions of a program written for a compact 32-bit ISA are explored
//! symbolically over a shared input vocabulary. Terminal states that some
//! common input can reach are paired and diffed observationally.

pub mod cli;
pub mod compare;
pub mod concolic;
pub mod isa;
pub mod oracle;
pub mod report;
pub mod service;
pub mod solver;
pub mod symexec;
pub mod term;
