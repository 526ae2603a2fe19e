//! Harness files: which two programs to compare, the shared inputs, and
//! everything injected into exploration.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::state::{implicit_var, Side};
use crate::isa::{self, container, Program, DEFAULT_CALL_DEPTH};
use crate::term::{self, parse_expr, parse_pred, Env, Term, Var};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("reading {file}: {source}")]
    Io {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("harness JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn invalid(path: impl Into<String>, msg: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        msg: msg.to_string(),
    }
}

/// A program given by file path (`.asm` or `.czb`) or inline assembly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProgramRef {
    Path(PathBuf),
    Asm { asm: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binding {
    /// Zero-extended into a register.
    Reg(u8),
    /// Little-endian bytes starting at this address.
    Mem(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDecl {
    pub name: String,
    pub width: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bind: Option<Binding>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemInit {
    pub addr: u32,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectiveKind {
    BreakpointLog,
    Assume,
    Assert,
    Postcondition,
    VirtualPrint,
    Error,
}

impl DirectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            DirectiveKind::BreakpointLog => "breakpoint-log",
            DirectiveKind::Assume => "assume",
            DirectiveKind::Assert => "assert",
            DirectiveKind::Postcondition => "postcondition",
            DirectiveKind::VirtualPrint => "virtual-print",
            DirectiveKind::Error => "error",
        }
    }
}

/// Instruction index or `label`, `label+off`, `label-off`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Location {
    Index(u32),
    Symbol(String),
}

impl Location {
    pub fn resolve(&self, p: &Program) -> Result<u32, String> {
        let pc = match self {
            Location::Index(i) => *i as i64,
            Location::Symbol(s) => {
                let s = s.trim();
                if let Ok(i) = s.parse::<u32>() {
                    i as i64
                } else {
                    let (label, off) = match s.find(['+', '-']) {
                        Some(at) => {
                            let off: i64 = s[at + 1..]
                                .trim()
                                .parse()
                                .map_err(|_| format!("bad offset in `{s}`"))?;
                            let off = if s.as_bytes()[at] == b'-' { -off } else { off };
                            (s[..at].trim(), off)
                        }
                        None => (s, 0),
                    };
                    let base = p.label(label).ok_or_else(|| format!("unknown label `{label}`"))?;
                    base as i64 + off
                }
            }
        };
        if pc < 0 || pc >= p.len() as i64 {
            return Err(format!("location {pc} is outside the code (0..{})", p.len()));
        }
        Ok(pc as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectiveSpec {
    pub kind: DirectiveKind,
    /// Required except for postconditions, which run on completion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<Location>,
    /// Predicate for assume/assert/postcondition; value for virtual-print.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReturnPolicy {
    /// `"fresh"`: a new shared variable per call.
    Fresh(FreshTag),
    Expr { expr: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreshTag {
    Fresh,
}

impl Default for ReturnPolicy {
    fn default() -> Self {
        ReturnPolicy::Fresh(FreshTag::Fresh)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HookEffect {
    pub channel: u32,
    /// Byte-valued expression.
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HookSpec {
    pub name: String,
    /// Callee location; calls to it are replaced by the hook.
    pub target: Location,
    #[serde(default)]
    pub returns: ReturnPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<HookEffect>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerSide<T> {
    #[serde(default)]
    pub pre: T,
    #[serde(default)]
    pub post: T,
}

impl<T> PerSide<T> {
    pub fn get(&self, side: Side) -> &T {
        match side {
            Side::Pre => &self.pre,
            Side::Post => &self.post,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Complete,
    Concolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heuristics {
    /// `complete`, `coverage:<fraction>` or `cyclomatic`.
    #[serde(default = "default_termination")]
    pub termination: String,
    /// `trivial` or `ngram:<n>`.
    #[serde(default = "default_candidate")]
    pub candidate: String,
}

fn default_termination() -> String {
    "complete".into()
}

fn default_candidate() -> String {
    "ngram:2".into()
}

impl Default for Heuristics {
    fn default() -> Self {
        Heuristics {
            termination: default_termination(),
            candidate: default_candidate(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegSlice {
    pub reg: u8,
    #[serde(default)]
    pub lo: u8,
    #[serde(default = "full_width")]
    pub width: u8,
}

fn full_width() -> u8 {
    32
}

impl RegSlice {
    pub fn label(&self) -> String {
        if self.lo == 0 && self.width == 32 {
            format!("r{}", self.reg)
        } else {
            format!("r{}[{}..{}]", self.reg, self.lo, self.lo as u32 + self.width as u32)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemRegion {
    pub addr: u32,
    pub len: u32,
}

/// What the diff looks at. Missing lists mean "everything".
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observables {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registers: Option<Vec<RegSlice>>,
    /// Restricts the written-address domain to these regions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<Vec<MemRegion>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<u32>>,
}

impl Observables {
    pub fn register_slices(&self) -> Vec<RegSlice> {
        self.registers.clone().unwrap_or_else(|| {
            (0..isa::NUM_REGS as u8)
                .map(|reg| RegSlice { reg, lo: 0, width: 32 })
                .collect()
        })
    }

    pub fn memory_included(&self, addr: u32) -> bool {
        match &self.memory {
            None => true,
            Some(rs) => rs
                .iter()
                .any(|r| addr >= r.addr && (addr as u64) < r.addr as u64 + r.len as u64),
        }
    }

    pub fn channel_included(&self, ch: u32) -> bool {
        self.channels.as_ref().is_none_or(|c| c.contains(&ch))
    }
}

/// A relative-correctness property checked over every compatible pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropertySpec {
    /// `"observables-agree"`: every observable register slice and written
    /// memory byte is equal.
    Named(String),
    /// A predicate over both final register files and the inputs, with
    /// registers written `pre_rN` / `post_rN`: `pre_r0 == post_r0`.
    Expr { expr: String },
}

/// The harness file as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub pre: ProgramRef,
    pub post: ProgramRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    #[serde(default)]
    pub inputs: Vec<InputDecl>,
    #[serde(default)]
    pub init_memory: Vec<MemInit>,
    #[serde(default)]
    pub preconditions: Vec<String>,
    #[serde(default)]
    pub directives: PerSide<Vec<DirectiveSpec>>,
    #[serde(default)]
    pub hooks: PerSide<Vec<HookSpec>>,
    #[serde(default = "default_loop_bound")]
    pub loop_bound: u32,
    #[serde(default = "default_call_depth")]
    pub call_depth_max: usize,
    #[serde(default = "default_max_in")]
    pub max_in_bytes: u32,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub heuristics: Heuristics,
    #[serde(default)]
    pub observables: Observables,
    #[serde(default = "default_budget")]
    pub solver_budget_bits: u32,
    #[serde(default = "default_state_limit")]
    pub state_limit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<PropertySpec>,
}

fn default_loop_bound() -> u32 {
    32
}
fn default_call_depth() -> usize {
    DEFAULT_CALL_DEPTH
}
fn default_max_in() -> u32 {
    4
}
fn default_budget() -> u32 {
    crate::solver::DEFAULT_BUDGET_BITS
}
fn default_state_limit() -> usize {
    10_000
}

impl HarnessConfig {
    /// A config with defaults everywhere, comparing two inline programs.
    pub fn inline(pre: &str, post: &str) -> Self {
        serde_json::from_value(serde_json::json!({
            "pre": {"asm": pre},
            "post": {"asm": post},
        }))
        .expect("minimal config is valid")
    }
}

#[derive(Clone, Debug)]
pub struct Directive {
    pub kind: DirectiveKind,
    pub pc: Option<u32>,
    pub text: String,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Hook {
    pub name: String,
    pub target: u32,
    pub returns: Option<String>,
    pub effect: Option<HookEffect>,
}

/// Per-program part of a validated harness.
#[derive(Clone, Debug)]
pub struct ProgramSetup {
    pub program: Program,
    pub source: String,
    pub directives: Vec<Directive>,
    pub hooks: Vec<Hook>,
}

/// A validated, resolved harness.
#[derive(Clone, Debug)]
pub struct Harness {
    pub config: HarnessConfig,
    pub pre: ProgramSetup,
    pub post: ProgramSetup,
    pub inputs: BTreeMap<String, Var>,
    /// Concrete initial bytes (data segments are applied per program).
    pub init_memory: BTreeMap<u32, u8>,
    pub digest: String,
}

/// Environment used to type-check predicates before any state exists.
struct CheckEnv<'a> {
    inputs: &'a BTreeMap<String, Var>,
}

impl Env for CheckEnv<'_> {
    fn register(&self, index: usize) -> Option<Term> {
        Some(Term::var(&format!("__r{index}"), 32))
    }
    fn mem8(&self, _addr: u32) -> Option<Term> {
        Some(Term::var("__m", 8))
    }
    fn input(&self, name: &str) -> Option<Term> {
        self.inputs
            .get(name)
            .cloned()
            .or_else(|| implicit_var(name))
            .map(|v| Term::from_var(&v))
    }
}

/// Environment for property expressions over a pair of states.
pub struct PairCheckEnv<'a> {
    pub inputs: &'a BTreeMap<String, Var>,
}

impl Env for PairCheckEnv<'_> {
    fn input(&self, name: &str) -> Option<Term> {
        for side in ["pre_", "post_"] {
            if let Some(r) = name.strip_prefix(side).and_then(|r| r.strip_prefix('r')) {
                if let Ok(i) = r.parse::<usize>() {
                    if i < isa::NUM_REGS {
                        return Some(Term::var(&format!("__{side}r{i}"), 32));
                    }
                }
            }
        }
        CheckEnv { inputs: self.inputs }.input(name)
    }
}

fn load_program(r: &ProgramRef, base: &Path, path: &str) -> Result<(Program, String), ConfigError> {
    match r {
        ProgramRef::Asm { asm } => {
            let p = isa::assemble(asm).map_err(|e| invalid(path, e))?;
            Ok((p, asm.clone()))
        }
        ProgramRef::Path(file) => {
            let full = base.join(file);
            let bytes = std::fs::read(&full).map_err(|source| ConfigError::Io {
                file: full.clone(),
                source,
            })?;
            if full.extension().is_some_and(|e| e == "czb") || bytes.starts_with(container::MAGIC) {
                let p = container::decode(&bytes).map_err(|e| invalid(path, e))?;
                let text = isa::disassemble(&p);
                Ok((p, text))
            } else {
                let text = String::from_utf8(bytes).map_err(|e| invalid(path, e))?;
                let p = isa::assemble(&text).map_err(|e| invalid(path, e))?;
                Ok((p, text))
            }
        }
    }
}

impl Harness {
    pub fn load(file: &Path) -> Result<Harness, ConfigError> {
        let text = std::fs::read_to_string(file).map_err(|source| ConfigError::Io {
            file: file.to_path_buf(),
            source,
        })?;
        let cfg: HarnessConfig = serde_json::from_str(&text)?;
        let base = file.parent().unwrap_or(Path::new("."));
        Harness::from_config(cfg, base)
    }

    pub fn from_json(text: &str, base: &Path) -> Result<Harness, ConfigError> {
        Harness::from_config(serde_json::from_str(text)?, base)
    }

    pub fn from_config(cfg: HarnessConfig, base: &Path) -> Result<Harness, ConfigError> {
        let mut inputs = BTreeMap::new();
        let mut regs_bound = BTreeSet::new();
        let mut bytes_bound: BTreeMap<u32, String> = BTreeMap::new();
        for (i, d) in cfg.inputs.iter().enumerate() {
            let path = format!("inputs[{i}]");
            if !term::valid_width(d.width) {
                return Err(invalid(format!("{path}.width"), format!("width {} is not one of 1, 8, 16, 32", d.width)));
            }
            if d.name.is_empty()
                || !d.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                || d.name.starts_with(|c: char| c.is_ascii_digit())
            {
                return Err(invalid(format!("{path}.name"), format!("`{}` is not an identifier", d.name)));
            }
            if implicit_var(&d.name).is_some() || d.name.starts_with("__") {
                return Err(invalid(format!("{path}.name"), format!("`{}` is a reserved name", d.name)));
            }
            if inputs.insert(d.name.clone(), Var::new(d.name.as_str(), d.width)).is_some() {
                return Err(invalid(format!("{path}.name"), format!("duplicate input `{}`", d.name)));
            }
            match &d.bind {
                Some(Binding::Reg(r)) => {
                    if *r as usize >= isa::NUM_REGS {
                        return Err(invalid(format!("{path}.bind.reg"), format!("no register r{r}")));
                    }
                    if !regs_bound.insert(*r) {
                        return Err(invalid(format!("{path}.bind.reg"), format!("r{r} is already bound")));
                    }
                }
                Some(Binding::Mem(addr)) => {
                    let n = (d.width as u32).div_ceil(8);
                    for k in 0..n {
                        let a = addr.wrapping_add(k);
                        if let Some(other) = bytes_bound.insert(a, d.name.clone()) {
                            return Err(invalid(
                                format!("{path}.bind.mem"),
                                format!("byte 0x{a:x} is already bound to `{other}`"),
                            ));
                        }
                    }
                }
                None => {}
            }
        }
        let mut init_memory = BTreeMap::new();
        for (i, m) in cfg.init_memory.iter().enumerate() {
            for (k, b) in m.bytes.iter().enumerate() {
                let a = m.addr.wrapping_add(k as u32);
                if let Some(owner) = bytes_bound.get(&a) {
                    return Err(invalid(
                        format!("init_memory[{i}]"),
                        format!("byte 0x{a:x} is bound to input `{owner}`"),
                    ));
                }
                init_memory.insert(a, *b);
            }
        }

        let check = CheckEnv { inputs: &inputs };
        for (i, p) in cfg.preconditions.iter().enumerate() {
            parse_pred(p, &check).map_err(|e| invalid(format!("preconditions[{i}]"), e))?;
        }
        if cfg.loop_bound == 0 {
            return Err(invalid("loop_bound", "must be at least 1"));
        }
        if cfg.solver_budget_bits == 0 {
            return Err(invalid("solver_budget_bits", "must be positive"));
        }
        crate::concolic::parse_termination(&cfg.heuristics.termination)
            .map_err(|e| invalid("heuristics.termination", e))?;
        crate::concolic::parse_candidate(&cfg.heuristics.candidate)
            .map_err(|e| invalid("heuristics.candidate", e))?;
        if let Some(regs) = &cfg.observables.registers {
            for (i, s) in regs.iter().enumerate() {
                if s.reg as usize >= isa::NUM_REGS
                    || !term::valid_width(s.width)
                    || s.lo as u32 + s.width as u32 > 32
                {
                    return Err(invalid(format!("observables.registers[{i}]"), "malformed register slice"));
                }
            }
        }
        match &cfg.property {
            None => {}
            Some(PropertySpec::Named(n)) if n == "observables-agree" => {}
            Some(PropertySpec::Named(n)) => {
                return Err(invalid("property", format!("unknown property `{n}`")));
            }
            Some(PropertySpec::Expr { expr }) => {
                parse_pred(expr, &PairCheckEnv { inputs: &inputs })
                    .map_err(|e| invalid("property.expr", e))?;
            }
        }

        let mut setups = Vec::new();
        for side in [Side::Pre, Side::Post] {
            let r = if side == Side::Pre { &cfg.pre } else { &cfg.post };
            let (mut program, source) = load_program(r, base, side.name())?;
            if let Some(entry) = &cfg.entry {
                program.entry = program
                    .label(entry)
                    .ok_or_else(|| invalid("entry", format!("{side} has no label `{entry}`")))?;
            }
            let mut directives = Vec::new();
            for (i, d) in cfg.directives.get(side).iter().enumerate() {
                let path = format!("directives.{side}[{i}]");
                let pc = match (&d.at, d.kind) {
                    (Some(at), _) => Some(at.resolve(&program).map_err(|e| invalid(format!("{path}.at"), e))?),
                    (None, DirectiveKind::Postcondition) => None,
                    (None, _) => return Err(invalid(format!("{path}.at"), "missing location")),
                };
                let text = match d.kind {
                    DirectiveKind::Assume | DirectiveKind::Assert | DirectiveKind::Postcondition => {
                        let c = d.cond.clone().ok_or_else(|| invalid(format!("{path}.cond"), "missing condition"))?;
                        parse_pred(&c, &check).map_err(|e| invalid(format!("{path}.cond"), e))?;
                        c
                    }
                    DirectiveKind::VirtualPrint => {
                        let c = d.cond.clone().ok_or_else(|| invalid(format!("{path}.cond"), "missing payload"))?;
                        parse_expr(&c, &check, 32).map_err(|e| invalid(format!("{path}.cond"), e))?;
                        c
                    }
                    _ => d.cond.clone().unwrap_or_default(),
                };
                directives.push(Directive {
                    kind: d.kind,
                    pc,
                    text,
                    message: d.message.clone(),
                });
            }
            let mut hooks: Vec<Hook> = Vec::new();
            for (i, h) in cfg.hooks.get(side).iter().enumerate() {
                let path = format!("hooks.{side}[{i}]");
                if h.name.is_empty() || !h.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(invalid(format!("{path}.name"), "hook names are identifiers"));
                }
                let target = h.target.resolve(&program).map_err(|e| invalid(format!("{path}.target"), e))?;
                if hooks.iter().any(|o| o.target == target) {
                    return Err(invalid(format!("{path}.target"), "two hooks on one target"));
                }
                let returns = match &h.returns {
                    ReturnPolicy::Fresh(_) => None,
                    ReturnPolicy::Expr { expr } => {
                        parse_expr(expr, &check, 32).map_err(|e| invalid(format!("{path}.returns"), e))?;
                        Some(expr.clone())
                    }
                };
                if let Some(e) = &h.effect {
                    parse_expr(&e.expr, &check, 8).map_err(|err| invalid(format!("{path}.effect"), err))?;
                }
                hooks.push(Hook {
                    name: h.name.clone(),
                    target,
                    returns,
                    effect: h.effect.clone(),
                });
            }
            setups.push(ProgramSetup {
                program,
                source,
                directives,
                hooks,
            });
        }
        let post = setups.pop().unwrap();
        let pre = setups.pop().unwrap();

        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&cfg)?);
        h.update(isa::container::encode(&pre.program));
        h.update(isa::container::encode(&post.program));
        let digest = hex::encode(h.finalize());

        Ok(Harness {
            config: cfg,
            pre,
            post,
            inputs,
            init_memory,
            digest,
        })
    }

    pub fn setup(&self, side: Side) -> &ProgramSetup {
        match side {
            Side::Pre => &self.pre,
            Side::Post => &self.post,
        }
    }

    pub fn declared_vars(&self) -> BTreeSet<Var> {
        self.inputs.values().cloned().collect()
    }

    pub fn preconditions(&self) -> Vec<Term> {
        let env = CheckEnv { inputs: &self.inputs };
        self.config
            .preconditions
            .iter()
            .map(|p| parse_pred(p, &env).expect("validated"))
            .collect()
    }
}

/// Commented skeleton printed by the `template` command. Strip the `//`
/// lines with [`strip_comments`] before loading.
pub fn template() -> String {
    r#"{
  // Programs to compare: a path to .asm or .czb (relative to this file), or {"asm": "..."}.
  "pre": "pre.asm",
  "post": "post.asm",
  // Optional: start both programs at this label instead of their .entry.
  "entry": "main",
  // Shared symbolic inputs. bind: {"reg": N} zero-extends into rN,
  // {"mem": ADDR} stores little-endian bytes at ADDR; omit bind for free variables.
  "inputs": [
    {"name": "cmd", "width": 8, "bind": {"reg": 1}},
    {"name": "arg", "width": 8, "bind": {"mem": 256}}
  ],
  // Concrete bytes present before execution.
  "init_memory": [{"addr": 512, "bytes": [0, 0, 0, 0]}],
  // Predicates over inputs (see the README for the expression language).
  "preconditions": ["cmd <u 4"],
  // kind: assume | assert | postcondition | error | virtual-print | breakpoint-log
  // at: instruction index, "label" or "label+offset" (postconditions run on completion).
  "directives": {
    "pre":  [{"kind": "assert", "at": "store", "cond": "r2 <u 16", "message": "index out of bounds"}],
    "post": []
  },
  // Calls to target are replaced: r0 gets a fresh shared variable hook_<name>_<k>
  // (or "returns": {"expr": "..."}), and an optional byte is emitted.
  "hooks": {
    "pre":  [{"name": "rand", "target": "rand", "returns": "fresh"}],
    "post": [{"name": "rand", "target": "rand", "returns": "fresh"}]
  },
  "loop_bound": 32,
  "call_depth_max": 64,
  "max_in_bytes": 4,
  // complete | concolic
  "mode": "complete",
  // termination: complete | coverage:0.8 | cyclomatic; candidate: trivial | ngram:2
  "heuristics": {"termination": "complete", "candidate": "ngram:2"},
  // Omitted lists mean everything.
  "observables": {
    "registers": [{"reg": 0, "lo": 0, "width": 32}],
    "memory": [{"addr": 512, "len": 4}],
    "channels": [0, 1, 3]
  },
  "solver_budget_bits": 24,
  "state_limit": 10000,
  // Checked over every compatible pair; counterexamples make `compare` exit with 2.
  "property": "observables-agree"
}
"#
    .to_string()
}

/// Removes the `//` comment lines of [`template`] output.
pub fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("//"))
        .collect::<Vec<_>>()
        .join("\n")
}
