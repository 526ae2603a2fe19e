use std::collections::BTreeMap;
use std::fmt::Write;

use super::{ReportDocument, Tree};
use crate::compare::{Classification, ValueDiff};

fn kind_counts(t: &Tree) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for id in &t.leaves {
        if let Some(k) = t.node(*id).and_then(|n| n.terminal.as_ref()) {
            *counts.entry(k.name()).or_default() += 1;
        }
    }
    counts.iter().map(|(k, n)| format!("{n} {k}")).collect::<Vec<_>>().join(", ")
}

/// Human-readable summary of a report.
pub fn textual_report(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let m = &doc.meta;
    for (side, p, t) in [("pre", &m.pre, &doc.trees.pre), ("post", &m.post, &doc.trees.post)] {
        let _ = writeln!(
            out,
            "{side}: {} ({} instructions, {} blocks, cyclomatic {})",
            p.name, p.instructions, p.blocks, p.cyclomatic
        );
        let _ = writeln!(out, "  {} terminal states: {}", t.leaves.len(), kind_counts(t));
    }
    let _ = writeln!(out, "compatible pairs: {}", doc.pairs.len());
    if doc.pairs.is_empty() {
        let _ = writeln!(out, "no compatible pairs");
    }
    let all_quiet = doc
        .pairs
        .iter()
        .all(|p| p.diff.exclusive.classification == Classification::Equivalent && p.diff.observably_equal());
    if all_quiet && !doc.pairs.is_empty() {
        let _ = writeln!(out, "all pairs equivalent; no observational differences");
    }
    for p in &doc.pairs {
        let d = &p.diff;
        if d.exclusive.classification == Classification::Equivalent && d.observably_equal() {
            continue;
        }
        let _ = writeln!(
            out,
            "pair pre#{} / post#{}: {}",
            p.pair.pre,
            p.pair.post,
            d.exclusive.classification.name()
        );
        let _ = writeln!(out, "  shared input: {}", p.pair.witness);
        for r in &d.registers {
            if let ValueDiff::Differs {
                witness,
                pre_value,
                post_value,
            } = &r.status
            {
                let _ = writeln!(out, "  {}: 0x{pre_value:x} vs 0x{post_value:x} under {witness}", r.slice);
            }
        }
        for mem in &d.memory {
            match &mem.status {
                ValueDiff::Differs {
                    witness,
                    pre_value,
                    post_value,
                } => {
                    let _ = writeln!(
                        out,
                        "  mem[0x{:x}]: 0x{pre_value:x} vs 0x{post_value:x} under {witness}",
                        mem.addr
                    );
                }
                ValueDiff::Equal if mem.kind() == "written-by-one-side" => {
                    let _ = writeln!(out, "  mem[0x{:x}]: written by {:?} only, same value", mem.addr, mem.written_by);
                }
                ValueDiff::Equal => {}
            }
        }
        for e in &d.effects {
            if let Some(w) = &e.differs {
                let _ = writeln!(out, "  channel {}: output differs under {w}", e.channel);
            }
        }
        if let Some(a) = &d.exclusive.pre_only {
            let _ = writeln!(out, "  only pre reaches its state under {a}");
        }
        if let Some(a) = &d.exclusive.post_only {
            let _ = writeln!(out, "  only post reaches its state under {a}");
        }
    }
    if let Some(cx) = &m.counterexamples {
        if cx.is_empty() {
            let _ = writeln!(out, "property holds over all compatible pairs");
        } else {
            let _ = writeln!(out, "property fails on {} pair(s):", cx.len());
            for c in cx {
                let _ = writeln!(out, "  pre#{} / post#{} under {}", c.pre, c.post, c.witness);
            }
        }
    }
    if let Some(log) = &doc.inputs_log {
        let _ = writeln!(out, "concolic inputs: {}", log.len());
    }
    let s = &m.solver;
    let _ = writeln!(
        out,
        "solver: {} queries, {} solved, {} core hits, {} model hits",
        s.queries, s.solved, s.core_hits, s.model_hits
    );
    out
}
