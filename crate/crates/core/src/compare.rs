//! Compatible pairs, observational diffs, refinement classes and
//! relative-correctness checks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concolic::{execute_concolic, InputLogEntry};
use crate::solver::{Query, SatResult, Solver, SolverError, SolverStats};
use crate::symexec::{
    execute_complete, implicit_var, vocabulary, ExecError, Harness, Mode, NodeId, Observables, PropertySpec,
    RunResult, Side, SymState,
};
use crate::term::{parse_pred, pretty, Assignment, Env, Evaluator, Term, TermError, Var};

#[derive(Debug, Error)]
pub enum CompareError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("property: {0}")]
    Property(TermError),
    #[error("states {pre} and {post} are not compatible")]
    NotCompatible { pre: NodeId, post: NodeId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatiblePair {
    pub pre: NodeId,
    pub post: NodeId,
    pub witness: Assignment,
}

/// Both constraint sets, pre first.
pub fn joint(s: &SymState, t: &SymState) -> Vec<Term> {
    s.constraints.iter().chain(&t.constraints).cloned().collect()
}

fn query(clauses: Vec<Term>, domain: &BTreeSet<Var>) -> Query {
    let mut vars = domain.clone();
    for c in &clauses {
        vars.extend(c.vars());
    }
    Query::with_domain(clauses, vars)
}

/// Every (pre, post) terminal pair whose joint constraints are satisfiable,
/// pre terminals outer and post terminals inner, both in node order.
pub fn compatible_pairs(
    a: &RunResult,
    b: &RunResult,
    solver: &Solver,
    domain: &BTreeSet<Var>,
) -> Result<Vec<CompatiblePair>, SolverError> {
    let mut out = Vec::new();
    for s in &a.terminals {
        for t in &b.terminals {
            if let SatResult::Sat(m) = solver.solve(&query(joint(s, t), domain))? {
                out.push(CompatiblePair {
                    pre: s.node_id,
                    post: t.node_id,
                    witness: m,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum ValueDiff {
    Equal,
    Differs {
        witness: Assignment,
        pre_value: u32,
        post_value: u32,
    },
}

impl ValueDiff {
    pub fn differs(&self) -> bool {
        matches!(self, ValueDiff::Differs { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterDiff {
    pub slice: String,
    pub pre: String,
    pub post: String,
    #[serde(flatten)]
    pub status: ValueDiff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WrittenBy {
    Both,
    Pre,
    Post,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryDiff {
    pub addr: u32,
    pub written_by: WrittenBy,
    pub pre: String,
    pub post: String,
    #[serde(flatten)]
    pub status: ValueDiff,
}

impl MemoryDiff {
    /// `equal`, `differs`, or `written-by-one-side`.
    pub fn kind(&self) -> &'static str {
        match (self.written_by, &self.status) {
            (WrittenBy::Pre | WrittenBy::Post, _) => "written-by-one-side",
            (_, ValueDiff::Equal) => "equal",
            (_, ValueDiff::Differs { .. }) => "differs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Keep,
    Delete,
    Insert,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedEffect {
    pub op: EditOp,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pre: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub post: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDiff {
    pub channel: u32,
    pub aligned: Vec<AlignedEffect>,
    /// A joint input under which the two byte sequences differ.
    pub differs: Option<Assignment>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Equivalent,
    PreRefinesPost,
    PostRefinesPre,
    Overlapping,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Equivalent => "equivalent",
            Classification::PreRefinesPost => "pre-refines-post",
            Classification::PostRefinesPre => "post-refines-pre",
            Classification::Overlapping => "overlapping",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusive {
    pub classification: Classification,
    /// An input reaching the pre state but not the post state.
    pub pre_only: Option<Assignment>,
    pub post_only: Option<Assignment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    pub registers: Vec<RegisterDiff>,
    pub memory: Vec<MemoryDiff>,
    pub effects: Vec<ChannelDiff>,
    #[serde(flatten)]
    pub exclusive: Exclusive,
}

impl DiffReport {
    pub fn registers_differ(&self) -> bool {
        self.registers.iter().any(|r| r.status.differs())
    }

    pub fn memory_differs(&self) -> bool {
        self.memory.iter().any(|m| m.status.differs())
    }

    pub fn channel_differs(&self, ch: u32) -> bool {
        self.effects.iter().any(|e| e.channel == ch && e.differs.is_some())
    }

    /// No register, memory or channel difference.
    pub fn observably_equal(&self) -> bool {
        !self.registers_differ() && !self.memory_differs() && self.effects.iter().all(|e| e.differs.is_none())
    }
}

/// LCS alignment of two sequences as (index in a, index in b) steps.
/// Deletions come before insertions within a changed run.
pub fn align<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(Option<usize>, Option<usize>)> {
    let (n, m) = (a.len(), b.len());
    let mut dp = vec![0u32; (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            dp[at(i, j)] = if a[i] == b[j] {
                dp[at(i + 1, j + 1)] + 1
            } else {
                dp[at(i + 1, j)].max(dp[at(i, j + 1)])
            };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(n.max(m));
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            out.push((Some(i), Some(j)));
            i += 1;
            j += 1;
        } else if i < n && (j == m || dp[at(i + 1, j)] >= dp[at(i, j + 1)]) {
            out.push((Some(i), None));
            i += 1;
        } else {
            out.push((None, Some(j)));
            j += 1;
        }
    }
    out
}

fn eval_pair(m: &Assignment, a: &Term, b: &Term) -> (u32, u32) {
    let mut full = m.clone();
    for t in [a, b] {
        for v in t.vars() {
            if !full.contains(&v.name) {
                full.insert(&v, 0);
            }
        }
    }
    let mut ev = Evaluator::new(&full);
    (ev.eval(a).unwrap(), ev.eval(b).unwrap())
}

struct Differ<'a> {
    clauses: Vec<Term>,
    witness: &'a Assignment,
    solver: &'a Solver,
    domain: &'a BTreeSet<Var>,
}

impl Differ<'_> {
    fn value(&self, a: &Term, b: &Term) -> Result<ValueDiff, SolverError> {
        if a == b {
            return Ok(ValueDiff::Equal);
        }
        let m = if a.is_const() && b.is_const() {
            Some(self.witness.clone())
        } else {
            let mut c = self.clauses.clone();
            c.push(a.ne_(b));
            match self.solver.solve(&query(c, self.domain))? {
                SatResult::Sat(m) => Some(m),
                SatResult::Unsat(_) => None,
            }
        };
        Ok(match m {
            Some(witness) => {
                let (pre_value, post_value) = eval_pair(&witness, a, b);
                ValueDiff::Differs {
                    witness,
                    pre_value,
                    post_value,
                }
            }
            None => ValueDiff::Equal,
        })
    }
}

fn slice(t: &Term, lo: u8, width: u8) -> Term {
    if lo == 0 && width == 32 {
        t.clone()
    } else {
        t.extract(lo, width).expect("validated slice")
    }
}

/// Union of observed written addresses with who wrote them.
fn written_domain(s: &SymState, t: &SymState, obs: &Observables) -> BTreeMap<u32, WrittenBy> {
    let mut out = BTreeMap::new();
    for a in s.written.union(&t.written) {
        if !obs.memory_included(*a) {
            continue;
        }
        let by = match (s.written.contains(a), t.written.contains(a)) {
            (true, true) => WrittenBy::Both,
            (true, false) => WrittenBy::Pre,
            _ => WrittenBy::Post,
        };
        out.insert(*a, by);
    }
    out
}

/// Observational diff of one compatible pair.
pub fn diff_pair(
    s: &SymState,
    t: &SymState,
    pair: &CompatiblePair,
    obs: &Observables,
    solver: &Solver,
    domain: &BTreeSet<Var>,
) -> Result<DiffReport, SolverError> {
    let d = Differ {
        clauses: joint(s, t),
        witness: &pair.witness,
        solver,
        domain,
    };
    let mut registers = Vec::new();
    for sl in obs.register_slices() {
        let (a, b) = (
            slice(&s.regs[sl.reg as usize], sl.lo, sl.width),
            slice(&t.regs[sl.reg as usize], sl.lo, sl.width),
        );
        registers.push(RegisterDiff {
            slice: sl.label(),
            pre: pretty(&a),
            post: pretty(&b),
            status: d.value(&a, &b)?,
        });
    }
    let mut memory = Vec::new();
    for (addr, written_by) in written_domain(s, t, obs) {
        let (a, b) = (s.read8(addr), t.read8(addr));
        memory.push(MemoryDiff {
            addr,
            written_by,
            pre: pretty(&a),
            post: pretty(&b),
            status: d.value(&a, &b)?,
        });
    }
    let channels: BTreeSet<u32> = s
        .effects
        .keys()
        .chain(t.effects.keys())
        .copied()
        .filter(|c| obs.channel_included(*c))
        .collect();
    let mut effects = Vec::new();
    for ch in channels {
        let (pa, pb): (Vec<Term>, Vec<Term>) = (
            s.effect_log(ch).iter().map(|e| e.payload.clone()).collect(),
            t.effect_log(ch).iter().map(|e| e.payload.clone()).collect(),
        );
        let aligned = align(&pa, &pb)
            .into_iter()
            .map(|(i, j)| AlignedEffect {
                op: match (i, j) {
                    (Some(_), Some(_)) => EditOp::Keep,
                    (Some(_), None) => EditOp::Delete,
                    _ => EditOp::Insert,
                },
                pre: i.map(|i| pretty(&pa[i])),
                post: j.map(|j| pretty(&pb[j])),
            })
            .collect();
        let mut differs = None;
        if pa.len() != pb.len() {
            differs = Some(pair.witness.clone());
        } else {
            for (a, b) in pa.iter().zip(&pb) {
                if let ValueDiff::Differs { witness, .. } = d.value(a, b)? {
                    differs = Some(witness);
                    break;
                }
            }
        }
        effects.push(ChannelDiff {
            channel: ch,
            aligned,
            differs,
        });
    }
    Ok(DiffReport {
        registers,
        memory,
        effects,
        exclusive: classify(s, t, solver, domain)?,
    })
}

/// Refinement class of a compatible pair, with exclusive inputs.
pub fn classify(s: &SymState, t: &SymState, solver: &Solver, domain: &BTreeSet<Var>) -> Result<Exclusive, SolverError> {
    classify_sets(&s.constraints, &t.constraints, solver, domain)
}

/// [`classify`] over bare constraint sets.
pub fn classify_sets(a: &[Term], b: &[Term], solver: &Solver, domain: &BTreeSet<Var>) -> Result<Exclusive, SolverError> {
    let only = |a: &[Term], b: &[Term]| -> Result<Option<Assignment>, SolverError> {
        let mut c = a.to_vec();
        c.push(Term::all(b).not());
        Ok(match solver.solve(&query(c, domain))? {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat(_) => None,
        })
    };
    let pre_only = only(a, b)?;
    let post_only = only(b, a)?;
    let classification = match (&pre_only, &post_only) {
        (None, None) => Classification::Equivalent,
        (None, Some(_)) => Classification::PreRefinesPost,
        (Some(_), None) => Classification::PostRefinesPre,
        (Some(_), Some(_)) => Classification::Overlapping,
    };
    Ok(Exclusive {
        classification,
        pre_only,
        post_only,
    })
}

/// A total input over `domain` reaching both states.
pub fn concretize(s: &SymState, t: &SymState, solver: &Solver, domain: &BTreeSet<Var>) -> Result<Assignment, CompareError> {
    concretize_sets(&s.constraints, &t.constraints, solver, domain)?.ok_or(CompareError::NotCompatible {
        pre: s.node_id,
        post: t.node_id,
    })
}

/// A total input over `domain` satisfying both sets, if any.
pub fn concretize_sets(a: &[Term], b: &[Term], solver: &Solver, domain: &BTreeSet<Var>) -> Result<Option<Assignment>, SolverError> {
    let clauses: Vec<Term> = a.iter().chain(b).cloned().collect();
    Ok(match solver.solve(&query(clauses, domain))? {
        SatResult::Sat(m) => Some(m.completed(domain).merged(&m)),
        SatResult::Unsat(_) => None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub pre: NodeId,
    pub post: NodeId,
    pub witness: Assignment,
}

/// Pairs under which `predicate` can fail, each with a failing input.
pub fn check_relative_property(
    pairs: &[CompatiblePair],
    pre: &RunResult,
    post: &RunResult,
    predicate: &dyn Fn(&SymState, &SymState) -> Result<Term, CompareError>,
    solver: &Solver,
    domain: &BTreeSet<Var>,
) -> Result<Vec<Counterexample>, CompareError> {
    let mut out = Vec::new();
    for p in pairs {
        let (s, t) = (pre.terminal(p.pre).unwrap(), post.terminal(p.post).unwrap());
        let prop = predicate(s, t)?;
        if prop.is_true() {
            continue;
        }
        let mut c = joint(s, t);
        c.push(prop.not());
        if let SatResult::Sat(m) = solver.solve(&query(c, domain))? {
            out.push(Counterexample {
                pre: p.pre,
                post: p.post,
                witness: m,
            });
        }
    }
    Ok(out)
}

/// Every observable register slice and observed written byte agrees.
pub fn observables_agree(s: &SymState, t: &SymState, obs: &Observables) -> Term {
    let mut parts = Vec::new();
    for sl in obs.register_slices() {
        parts.push(slice(&s.regs[sl.reg as usize], sl.lo, sl.width).eq_(&slice(&t.regs[sl.reg as usize], sl.lo, sl.width)));
    }
    for addr in written_domain(s, t, obs).keys() {
        parts.push(s.read8(*addr).eq_(&t.read8(*addr)));
    }
    Term::all(&parts)
}

/// Names `pre_rN` / `post_rN` bound to a pair's final registers.
pub struct PairEnv<'a> {
    pub pre: &'a SymState,
    pub post: &'a SymState,
    pub inputs: &'a BTreeMap<String, Var>,
}

impl Env for PairEnv<'_> {
    fn input(&self, name: &str) -> Option<Term> {
        for (prefix, s) in [("pre_r", self.pre), ("post_r", self.post)] {
            if let Some(i) = name.strip_prefix(prefix).and_then(|r| r.parse::<usize>().ok()) {
                return s.regs.get(i).cloned();
            }
        }
        self.inputs
            .get(name)
            .cloned()
            .or_else(|| implicit_var(name))
            .map(|v| Term::from_var(&v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    #[serde(flatten)]
    pub pair: CompatiblePair,
    pub diff: DiffReport,
}

#[derive(Clone, Debug)]
pub struct ComparisonResult {
    pub pre: RunResult,
    pub post: RunResult,
    pub pairs: Vec<PairReport>,
    pub domain: BTreeSet<Var>,
    pub stats: SolverStats,
    pub inputs_log: Option<Vec<InputLogEntry>>,
    /// Present when the harness configures a property.
    pub counterexamples: Option<Vec<Counterexample>>,
}

impl ComparisonResult {
    pub fn run(&self, side: Side) -> &RunResult {
        match side {
            Side::Pre => &self.pre,
            Side::Post => &self.post,
        }
    }

    /// Terminal node ids of one side that appear in no pair.
    pub fn orphans(&self, side: Side) -> Vec<NodeId> {
        let paired: BTreeSet<NodeId> = self
            .pairs
            .iter()
            .map(|p| match side {
                Side::Pre => p.pair.pre,
                Side::Post => p.pair.post,
            })
            .collect();
        self.run(side)
            .terminals
            .iter()
            .map(|s| s.node_id)
            .filter(|id| !paired.contains(id))
            .collect()
    }
}

/// Explores both programs, pairs and diffs their terminals, and checks
/// the configured property.
pub fn compare(h: &Harness, solver: &Solver) -> Result<ComparisonResult, CompareError> {
    let (pre, post, inputs_log) = match h.config.mode {
        Mode::Complete => (
            execute_complete(h, Side::Pre, solver)?,
            execute_complete(h, Side::Post, solver)?,
            None,
        ),
        Mode::Concolic => {
            let r = execute_concolic(h, solver)?;
            (r.pre, r.post, Some(r.log))
        }
    };
    compare_runs(h, pre, post, inputs_log, solver)
}

/// The pairing and diffing half of [`compare`].
pub fn compare_runs(
    h: &Harness,
    pre: RunResult,
    post: RunResult,
    inputs_log: Option<Vec<InputLogEntry>>,
    solver: &Solver,
) -> Result<ComparisonResult, CompareError> {
    let domain = vocabulary(h, &[&pre, &post]);
    let obs = &h.config.observables;
    let mut pairs = Vec::new();
    for p in compatible_pairs(&pre, &post, solver, &domain)? {
        let (s, t) = (pre.terminal(p.pre).unwrap(), post.terminal(p.post).unwrap());
        let diff = diff_pair(s, t, &p, obs, solver, &domain)?;
        pairs.push(PairReport { pair: p, diff });
    }
    let plain: Vec<CompatiblePair> = pairs.iter().map(|p| p.pair.clone()).collect();
    let counterexamples = match &h.config.property {
        None => None,
        Some(PropertySpec::Named(_)) => Some(check_relative_property(
            &plain,
            &pre,
            &post,
            &|s, t| Ok(observables_agree(s, t, obs)),
            solver,
            &domain,
        )?),
        Some(PropertySpec::Expr { expr }) => {
            let pred = |s: &SymState, t: &SymState| {
                let env = PairEnv {
                    pre: s,
                    post: t,
                    inputs: &h.inputs,
                };
                parse_pred(expr, &env).map_err(CompareError::Property)
            };
            Some(check_relative_property(&plain, &pre, &post, &pred, solver, &domain)?)
        }
    };
    Ok(ComparisonResult {
        pre,
        post,
        pairs,
        domain,
        stats: solver.stats(),
        inputs_log,
        counterexamples,
    })
}

/// Concrete bytes a state emits on `channel` under `m`.
pub fn sample_output(s: &SymState, channel: u32, m: &Assignment) -> Vec<u8> {
    let log = s.effect_log(channel);
    let mut full = m.clone();
    for e in log {
        for v in e.payload.vars() {
            if !full.contains(&v.name) {
                full.insert(&v, 0);
            }
        }
    }
    let mut ev = Evaluator::new(&full);
    log.iter().map(|e| ev.eval(&e.payload).unwrap() as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn align_prefers_keeps() {
        let a = ["a", "b", "c"];
        let b = ["a", "x", "c"];
        let steps = align(&a, &b);
        assert_eq!(
            steps,
            vec![(Some(0), Some(0)), (Some(1), None), (None, Some(1)), (Some(2), Some(2))]
        );
        assert_eq!(align::<u8>(&[], &[]), vec![]);
    }
}
