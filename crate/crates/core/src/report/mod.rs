//! The comparison document: both trees, pairs with diffs, per-leaf event
//! streams and the concolic input log. One JSON file, versioned.

mod compress;
mod diff;
mod prune;
mod text;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use compress::compress;
pub use diff::{apply_script, line_diff, Hunk};
pub use prune::{prune, parse_relations, Relation, Visible};
pub use text::textual_report;

use crate::compare::{sample_output, ComparisonResult, Counterexample, PairReport};
use crate::concolic::InputLogEntry;
use crate::solver::SolverStats;
use crate::symexec::{Event, Flag, Harness, Mode, NodeId, ProgramRef, RunResult, Side, TerminalKind};
use crate::term::{pretty, Assignment, Var};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramMeta {
    pub name: String,
    pub instructions: u32,
    pub blocks: usize,
    pub cyclomatic: usize,
    pub terminals: usize,
    pub discarded: usize,
    /// Label-aware disassembly, one line per instruction.
    pub listing: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub pre: ProgramMeta,
    pub post: ProgramMeta,
    pub config_digest: String,
    pub mode: Mode,
    pub solver: SolverStats,
    pub solver_budget_bits: u32,
    /// Every shared variable, for re-parsing constraints.
    pub vocabulary: Vec<Var>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexamples: Option<Vec<Counterexample>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub pc_start: u32,
    pub pc_end: u32,
    /// Constraints added here, pretty-printed.
    pub constraints: Vec<String>,
    pub flags: Vec<Flag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<TerminalKind>,
    /// Disassembly of the instructions executed in this node.
    pub instructions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<(u32, Vec<String>)>,
    /// Leaves only: the model the sample output was evaluated under.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Assignment>,
    /// Leaves only: bytes per channel under `witness`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sample_output: BTreeMap<u32, Vec<u8>>,
    /// Original node ids folded into this one by compression.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub merged: Vec<NodeId>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    /// Terminal node ids in order.
    pub leaves: Vec<NodeId>,
}

impl Tree {
    pub fn node(&self, id: NodeId) -> Option<&TreeNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Ids from the root to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = self.node(id).and_then(|n| n.parent);
        while let Some(p) = cur {
            path.push(p);
            cur = self.node(p).and_then(|n| n.parent);
        }
        path.reverse();
        path
    }

    /// Every constraint on the path to `id`, in order.
    pub fn path_constraints(&self, id: NodeId) -> Vec<String> {
        self.path_to(id)
            .into_iter()
            .filter_map(|n| self.node(n))
            .flat_map(|n| n.constraints.iter().cloned())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trees {
    pub pre: Tree,
    pub post: Tree,
}

impl Trees {
    pub fn get(&self, side: Side) -> &Tree {
        match side {
            Side::Pre => &self.pre,
            Side::Post => &self.post,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamLine {
    pub node: NodeId,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventStream {
    pub leaf: NodeId,
    pub instructions: Vec<StreamLine>,
    pub accesses: Vec<StreamLine>,
    pub effects: Vec<StreamLine>,
}

impl EventStream {
    pub fn instruction_text(&self) -> Vec<String> {
        self.instructions.iter().map(|l| l.text.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Streams {
    pub pre: Vec<EventStream>,
    pub post: Vec<EventStream>,
}

impl Streams {
    pub fn leaf(&self, side: Side, leaf: NodeId) -> Option<&EventStream> {
        let list = match side {
            Side::Pre => &self.pre,
            Side::Post => &self.post,
        };
        list.iter().find(|s| s.leaf == leaf)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub meta: Meta,
    pub trees: Trees,
    pub pairs: Vec<PairReport>,
    pub streams: Streams,
    #[serde(default)]
    pub inputs_log: Option<Vec<InputLogEntry>>,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<ReportDocument, String> {
        let doc: ReportDocument = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "report schema version {} is not supported (expected {SCHEMA_VERSION})",
                doc.schema_version
            ));
        }
        Ok(doc)
    }

    pub fn pair(&self, pre: NodeId, post: NodeId) -> Option<&PairReport> {
        self.pairs.iter().find(|p| p.pair.pre == pre && p.pair.post == post)
    }
}

fn program_name(r: &ProgramRef) -> String {
    match r {
        ProgramRef::Path(p) => p.display().to_string(),
        ProgramRef::Asm { .. } => "<inline>".into(),
    }
}

fn access_line(e: &Event) -> Option<String> {
    Some(match e {
        Event::Read { addr, value } => format!("load [0x{addr:x}] -> {}", pretty(value)),
        Event::Write { addr, value } => format!("store [0x{addr:x}] <- {}", pretty(value)),
        Event::RegWrite { reg, value } => format!("r{reg} <- {}", pretty(value)),
        Event::Hook { name, value } => format!("hook {name} -> {}", pretty(value)),
        _ => return None,
    })
}

fn build_tree(run: &RunResult) -> Tree {
    let mut nodes: Vec<TreeNode> = run
        .tree
        .iter()
        .map(|n| TreeNode {
            id: n.id,
            parent: n.parent,
            children: n.children.clone(),
            pc_start: n.pc_start,
            pc_end: n.pc_end,
            constraints: n.added.iter().map(pretty).collect(),
            flags: n.flags.iter().copied().collect(),
            terminal: n.terminal.clone(),
            instructions: n
                .events
                .iter()
                .filter_map(|e| match e {
                    Event::Instr { text, .. } => Some(text.clone()),
                    _ => None,
                })
                .collect(),
            snapshots: n.snapshots.clone(),
            witness: None,
            sample_output: BTreeMap::new(),
            merged: vec![],
        })
        .collect();
    for s in &run.terminals {
        let node = &mut nodes[s.node_id as usize];
        node.sample_output = s
            .effects
            .keys()
            .map(|ch| (*ch, sample_output(s, *ch, &s.witness)))
            .collect();
        node.witness = Some(s.witness.clone());
    }
    Tree {
        nodes,
        leaves: run.terminals.iter().map(|s| s.node_id).collect(),
    }
}

fn build_streams(run: &RunResult) -> Vec<EventStream> {
    run.terminals
        .iter()
        .map(|s| {
            let mut st = EventStream {
                leaf: s.node_id,
                instructions: vec![],
                accesses: vec![],
                effects: vec![],
            };
            for id in run.path_to(s.node_id) {
                for e in &run.node(id).events {
                    let line = |text: String| StreamLine { node: id, text };
                    match e {
                        Event::Instr { text, .. } => st.instructions.push(line(text.clone())),
                        Event::Directive { kind, detail } => {
                            st.instructions.push(line(format!("      ; {kind}: {detail}")))
                        }
                        Event::Effect { channel, payload } => {
                            st.effects.push(line(format!("ch{channel} <- {}", pretty(payload))))
                        }
                        other => st.accesses.extend(access_line(other).map(line)),
                    }
                }
            }
            st
        })
        .collect()
}

fn program_meta(h: &Harness, side: Side, run: &RunResult) -> ProgramMeta {
    let r = match side {
        Side::Pre => &h.config.pre,
        Side::Post => &h.config.post,
    };
    let p = &h.setup(side).program;
    ProgramMeta {
        name: program_name(r),
        instructions: p.len(),
        blocks: run.blocks,
        cyclomatic: run.cyclomatic,
        terminals: run.terminals.len(),
        discarded: run.discarded,
        listing: crate::symexec::disassembly_lines(p),
    }
}

/// Assembles the document for a finished comparison.
pub fn build_report(cr: &ComparisonResult, h: &Harness) -> ReportDocument {
    ReportDocument {
        schema_version: SCHEMA_VERSION,
        meta: Meta {
            pre: program_meta(h, Side::Pre, &cr.pre),
            post: program_meta(h, Side::Post, &cr.post),
            config_digest: h.digest.clone(),
            mode: h.config.mode,
            solver: cr.stats,
            solver_budget_bits: h.config.solver_budget_bits,
            vocabulary: cr.domain.iter().cloned().collect(),
            counterexamples: cr.counterexamples.clone(),
        },
        trees: Trees {
            pre: build_tree(&cr.pre),
            post: build_tree(&cr.post),
        },
        pairs: cr.pairs.clone(),
        streams: Streams {
            pre: build_streams(&cr.pre),
            post: build_streams(&cr.post),
        },
        inputs_log: cr.inputs_log.clone(),
    }
}
