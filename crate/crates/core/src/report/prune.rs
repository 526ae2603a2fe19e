use std::collections::BTreeSet;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::ReportDocument;
use crate::compare::PairReport;
use crate::isa::channel;
use crate::symexec::NodeId;

/// A symmetric relation between the two leaves of a compatible pair.
#[derive(Clone, Debug)]
pub enum Relation {
    MemoryDiffers,
    RegisterDiffers,
    StdoutDiffers,
    StderrDiffers,
    EitherErrored,
    /// At least one leaf's sample stdout, read as Latin-1, has no match.
    StdoutNotMatching(Regex),
}

impl Relation {
    pub fn name(&self) -> &'static str {
        match self {
            Relation::MemoryDiffers => "memory-differs",
            Relation::RegisterDiffers => "register-differs",
            Relation::StdoutDiffers => "stdout-differs",
            Relation::StderrDiffers => "stderr-differs",
            Relation::EitherErrored => "either-errored",
            Relation::StdoutNotMatching(_) => "stdout-not-matching",
        }
    }
}

/// Relation names plus the regex used by `stdout-not-matching`.
pub fn parse_relations(names: &[String], regex: Option<&str>) -> Result<Vec<Relation>, String> {
    names
        .iter()
        .map(|n| {
            Ok(match n.as_str() {
                "memory-differs" => Relation::MemoryDiffers,
                "register-differs" => Relation::RegisterDiffers,
                "stdout-differs" => Relation::StdoutDiffers,
                "stderr-differs" => Relation::StderrDiffers,
                "either-errored" => Relation::EitherErrored,
                "stdout-not-matching" => {
                    let r = regex.ok_or("stdout-not-matching needs a regex")?;
                    Relation::StdoutNotMatching(Regex::new(r).map_err(|e| format!("invalid regex: {e}"))?)
                }
                other => return Err(format!("unknown relation `{other}`")),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visible {
    pub visible_pre: Vec<NodeId>,
    pub visible_post: Vec<NodeId>,
}

fn latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

fn holds(doc: &ReportDocument, p: &PairReport, r: &Relation) -> bool {
    let a = doc.trees.pre.node(p.pair.pre).expect("pair leaves exist in the trees");
    let b = doc.trees.post.node(p.pair.post).expect("pair leaves exist in the trees");
    match r {
        Relation::MemoryDiffers => p.diff.memory_differs(),
        Relation::RegisterDiffers => p.diff.registers_differ(),
        Relation::StdoutDiffers => p.diff.channel_differs(channel::STDOUT),
        Relation::StderrDiffers => p.diff.channel_differs(channel::STDERR),
        Relation::EitherErrored => [a, b]
            .iter()
            .any(|n| n.terminal.as_ref().is_some_and(|t| t.is_error())),
        Relation::StdoutNotMatching(re) => [a, b].iter().any(|n| {
            let out = n.sample_output.get(&channel::STDOUT).map(|v| latin1(v)).unwrap_or_default();
            !re.is_match(&out)
        }),
    }
}

/// Leaves with at least one compatible partner for which every relation
/// holds. Both leaves of such a pair are visible, so none is orphaned.
pub fn prune(doc: &ReportDocument, relations: &[Relation]) -> Visible {
    let mut pre = BTreeSet::new();
    let mut post = BTreeSet::new();
    for p in &doc.pairs {
        if relations.iter().all(|r| holds(doc, p, r)) {
            pre.insert(p.pair.pre);
            post.insert(p.pair.post);
        }
    }
    Visible {
        visible_pre: pre.into_iter().collect(),
        visible_post: post.into_iter().collect(),
    }
}
