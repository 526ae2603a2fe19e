//! Brute-force cross-check of a comparison against concrete replay.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::compare::{sample_output, ComparisonResult};
use crate::concolic::satisfies;
use crate::solver::{all_assignments, ORACLE_BUDGET_BITS};
use crate::symexec::{replay, Harness, Side};
use crate::term::Var;

#[derive(Clone, Debug, Default, Serialize)]
pub struct CrossCheck {
    pub inputs: u64,
    /// Inputs that reach no terminal of some side (assumed away).
    pub uncovered: [u64; 2],
    pub mismatches: Vec<String>,
}

impl CrossCheck {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Enumerates every input over the comparison's vocabulary and checks that
/// each reaches at most one terminal per side, that concrete replay agrees
/// with that terminal, and that the two terminals it reaches are paired.
pub fn cross_check(h: &Harness, cr: &ComparisonResult) -> Result<CrossCheck, String> {
    let vars: Vec<Var> = cr.domain.iter().cloned().collect();
    let bits: u32 = vars.iter().map(|v| v.width as u32).sum();
    if bits > ORACLE_BUDGET_BITS {
        return Err(format!("{bits} input bits exceed the enumeration limit of {ORACLE_BUDGET_BITS}"));
    }
    let pairs: BTreeSet<(u32, u32)> = cr.pairs.iter().map(|p| (p.pair.pre, p.pair.post)).collect();
    let mut out = CrossCheck::default();
    for a in all_assignments(&vars) {
        out.inputs += 1;
        let mut reached = [None, None];
        for (i, side) in [Side::Pre, Side::Post].into_iter().enumerate() {
            let run = cr.run(side);
            let hits: Vec<_> = run.terminals.iter().filter(|s| satisfies(&a, &s.constraints)).collect();
            if hits.len() > 1 {
                out.mismatches.push(format!("{side}: input {a} reaches {} terminals", hits.len()));
                continue;
            }
            let Some(s) = hits.first() else {
                out.uncovered[i] += 1;
                continue;
            };
            reached[i] = Some(s.node_id);
            let r = replay(h, side, &a);
            let kind = s.terminal.as_ref().map(|k| k.name()).unwrap_or("");
            if r.terminal_name() != kind {
                out.mismatches.push(format!(
                    "{side}#{}: input {a} ends {} concretely, {kind} symbolically",
                    s.node_id,
                    r.terminal_name()
                ));
            }
            if r.block_history != s.block_history {
                out.mismatches.push(format!("{side}#{}: input {a} follows another block history", s.node_id));
            }
            for ch in s.effects.keys() {
                let want = sample_output(s, *ch, &a);
                let got = r.state.channels_out.get(ch).cloned().unwrap_or_default();
                if want != got {
                    out.mismatches.push(format!("{side}#{}: input {a} channel {ch} output differs", s.node_id));
                }
            }
        }
        if let [Some(p), Some(q)] = reached {
            if !pairs.contains(&(p, q)) {
                out.mismatches.push(format!("input {a} reaches pre#{p} and post#{q}, which are not paired"));
            }
        }
    }
    Ok(out)
}
