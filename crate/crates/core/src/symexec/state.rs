use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::isa::{TrapKind, NUM_REGS};
use crate::term::{byte_of, word_from_bytes, Assignment, Env, Term, Var};

pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Pre,
    Post,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Pre => Side::Post,
            Side::Post => Side::Pre,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Pre => "pre",
            Side::Post => "post",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TerminalKind {
    Halted,
    AssertFailed { message: String },
    PostconditionFailed { message: String },
    ErrorDirective { message: String },
    Trap { reason: TrapKind },
    LoopBound { block: u32 },
    InputExhausted { channel: u32 },
}

impl TerminalKind {
    pub fn name(&self) -> &'static str {
        match self {
            TerminalKind::Halted => "halted",
            TerminalKind::AssertFailed { .. } => "assert-failed",
            TerminalKind::PostconditionFailed { .. } => "postcondition-failed",
            TerminalKind::ErrorDirective { .. } => "error-directive",
            TerminalKind::Trap { .. } => "trap",
            TerminalKind::LoopBound { .. } => "loop-bound",
            TerminalKind::InputExhausted { .. } => "input-exhausted",
        }
    }

    /// Kinds that count as errored for pruning.
    pub fn is_error(&self) -> bool {
        matches!(
            self,
            TerminalKind::Trap { .. }
                | TerminalKind::AssertFailed { .. }
                | TerminalKind::PostconditionFailed { .. }
                | TerminalKind::ErrorDirective { .. }
        )
    }
}

impl fmt::Display for TerminalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminalKind::AssertFailed { message }
            | TerminalKind::PostconditionFailed { message }
            | TerminalKind::ErrorDirective { message }
                if !message.is_empty() =>
            {
                write!(f, "{} ({message})", self.name())
            }
            TerminalKind::Trap { reason } => write!(f, "trap ({reason})"),
            TerminalKind::LoopBound { block } => write!(f, "loop-bound (block {block})"),
            TerminalKind::InputExhausted { channel } => write!(f, "input-exhausted (channel {channel})"),
            _ => f.write_str(self.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectRecord {
    pub channel: u32,
    pub payload: Term,
    pub node: NodeId,
}

/// One line of a node's event stream.
#[derive(Clone, Debug)]
pub enum Event {
    Instr { pc: u32, text: String },
    Read { addr: u32, value: Term },
    Write { addr: u32, value: Term },
    RegWrite { reg: u8, value: Term },
    Effect { channel: u32, payload: Term },
    Hook { name: String, value: Term },
    Directive { kind: &'static str, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    Error,
    HookCall,
    LoopBound,
    AssertFailed,
    PostconditionFailed,
    ErrorDirective,
}

/// A node of the execution tree: one basic block's worth of execution, or
/// the start of a fork.
#[derive(Clone, Debug)]
pub struct ExecNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub pc_start: u32,
    pub pc_end: u32,
    pub added: Vec<Term>,
    pub flags: BTreeSet<Flag>,
    pub terminal: Option<TerminalKind>,
    pub events: Vec<Event>,
    /// Breakpoint-log snapshots: (pc, pretty-printed registers).
    pub snapshots: Vec<(u32, Vec<String>)>,
}

impl ExecNode {
    pub fn new(id: NodeId, parent: Option<NodeId>, pc: u32) -> Self {
        ExecNode {
            id,
            parent,
            children: vec![],
            pc_start: pc,
            pc_end: pc,
            added: vec![],
            flags: BTreeSet::new(),
            terminal: None,
            events: vec![],
            snapshots: vec![],
        }
    }

    pub fn executed_any(&self) -> bool {
        self.events.iter().any(|e| matches!(e, Event::Instr { .. }))
    }
}

#[derive(Clone, Debug)]
pub struct SymState {
    pub regs: [Term; NUM_REGS],
    /// Byte-granular memory; absent addresses read as zero.
    pub mem: BTreeMap<u32, Term>,
    pub pc: u32,
    pub constraints: Vec<Term>,
    pub call_stack: Vec<u32>,
    pub effects: BTreeMap<u32, Vec<EffectRecord>>,
    pub block_history: Vec<u32>,
    pub visit_counts: BTreeMap<u32, u32>,
    pub in_cursors: BTreeMap<u32, u32>,
    pub hook_cursors: BTreeMap<String, u32>,
    /// Addresses stored to by the program itself.
    pub written: BTreeSet<u32>,
    pub node_id: NodeId,
    pub parent_id: Option<NodeId>,
    pub terminal: Option<TerminalKind>,
    /// A model of `constraints`, kept to skip solver calls whose answer it
    /// already decides.
    pub witness: Assignment,
}

impl SymState {
    pub fn read8(&self, addr: u32) -> Term {
        self.mem
            .get(&addr)
            .cloned()
            .unwrap_or_else(|| Term::constant(0, 8))
    }

    pub fn read32(&self, addr: u32) -> Term {
        let b: Vec<Term> = (0..4).map(|i| self.read8(addr.wrapping_add(i))).collect();
        word_from_bytes([&b[0], &b[1], &b[2], &b[3]])
    }

    pub fn write32(&mut self, addr: u32, value: &Term) {
        for i in 0..4u32 {
            let a = addr.wrapping_add(i);
            self.mem.insert(a, byte_of(value, i as u8));
            self.written.insert(a);
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.is_some()
    }

    pub fn effect_log(&self, channel: u32) -> &[EffectRecord] {
        self.effects.get(&channel).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for c in &self.constraints {
            out.extend(c.vars());
        }
        out
    }
}

/// Name resolution against a symbolic state.
pub struct StateEnv<'a> {
    pub state: &'a SymState,
    pub inputs: &'a BTreeMap<String, Var>,
}

/// Names of the shared input bytes read by `in` and of hook return values.
pub fn in_var_name(channel: u32, k: u32) -> String {
    format!("in{channel}_{k}")
}

pub fn hook_var_name(hook: &str, k: u32) -> String {
    format!("hook_{hook}_{k}")
}

/// Resolves the implicit shared variables by name.
pub fn implicit_var(name: &str) -> Option<Var> {
    if let Some(rest) = name.strip_prefix("in") {
        let (ch, k) = rest.split_once('_')?;
        if !ch.is_empty() && !k.is_empty() && ch.bytes().chain(k.bytes()).all(|b| b.is_ascii_digit()) {
            return Some(Var::new(name, 8));
        }
    }
    if let Some(rest) = name.strip_prefix("hook_") {
        let (n, k) = rest.rsplit_once('_')?;
        if !n.is_empty() && !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()) {
            return Some(Var::new(name, 32));
        }
    }
    None
}

impl Env for StateEnv<'_> {
    fn register(&self, index: usize) -> Option<Term> {
        self.state.regs.get(index).cloned()
    }

    fn mem8(&self, addr: u32) -> Option<Term> {
        Some(self.state.read8(addr))
    }

    fn input(&self, name: &str) -> Option<Term> {
        self.inputs
            .get(name)
            .cloned()
            .or_else(|| implicit_var(name))
            .map(|v| Term::from_var(&v))
    }
}

/// All terminal states of one program plus the tree that produced them.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub side: Side,
    /// In node-id order.
    pub terminals: Vec<SymState>,
    pub tree: Vec<ExecNode>,
    pub blocks: usize,
    pub cyclomatic: usize,
    /// States dropped because a constraint made them infeasible.
    pub discarded: usize,
}

impl RunResult {
    pub fn node(&self, id: NodeId) -> &ExecNode {
        &self.tree[id as usize]
    }

    pub fn terminal(&self, node: NodeId) -> Option<&SymState> {
        self.terminals.iter().find(|s| s.node_id == node)
    }

    /// Node ids from the root down to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.tree[cur as usize].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for s in &self.terminals {
            out.extend(s.all_vars());
            for log in s.effects.values() {
                for e in log {
                    out.extend(e.payload.vars());
                }
            }
            for r in &s.regs {
                out.extend(r.vars());
            }
            for m in s.mem.values() {
                out.extend(m.vars());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implicit_names() {
        assert_eq!(implicit_var("in0_3"), Some(Var::new("in0_3", 8)));
        assert_eq!(implicit_var("hook_getc_0"), Some(Var::new("hook_getc_0", 32)));
        assert_eq!(implicit_var("hook_my_fn_12").map(|v| v.width), Some(32));
        assert_eq!(implicit_var("input"), None);
        assert_eq!(implicit_var("in0_"), None);
        assert_eq!(implicit_var("hook_x"), None);
    }
}
