//! Satisfiability of conjunctions of 1-bit terms.
//!
//! Queries are bit-blasted into a CDCL solver; each clause becomes one
//! assumption literal, so an unsat verdict names the clauses it used.
//! [`Solver`] adds the two session caches: unsat cores keyed by clause
//! identity, and a bounded most-recently-used list of models.

mod blast;
mod oracle;
mod sat;
mod smtlib;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{Assignment, Evaluator, Term, Var};

pub use blast::Blaster;
pub use oracle::{all_assignments, brute_force_sat, ORACLE_BUDGET_BITS};
pub use sat::{mk_lit, Lit, Outcome, SatSolver};
pub use smtlib::to_smtlib;

pub const DEFAULT_BUDGET_BITS: u32 = 24;
pub const DEFAULT_MODEL_CACHE: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("query needs {bits} input bits but the solver budget is {limit}; shrink the inputs or raise the budget")]
    BudgetExceeded { bits: u32, limit: u32 },
    #[error("clause {index} is {width} bits wide; clauses must be 1 bit")]
    NotBoolean { index: usize, width: u8 },
    #[error("clause {index} mentions undeclared variable `{var}`")]
    Undeclared { index: usize, var: String },
    #[error("query is satisfiable; there is no core to minimize")]
    NotUnsat,
}

/// A conjunction of 1-bit clauses over a declared variable domain.
#[derive(Clone, Debug)]
pub struct Query {
    pub clauses: Vec<Term>,
    pub vars: BTreeSet<Var>,
}

impl Query {
    /// Domain = the variables mentioned by the clauses.
    pub fn new(clauses: Vec<Term>) -> Query {
        let mut vars = BTreeSet::new();
        for c in &clauses {
            vars.extend(c.vars());
        }
        Query { clauses, vars }
    }

    pub fn with_domain(clauses: Vec<Term>, vars: BTreeSet<Var>) -> Query {
        Query { clauses, vars }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        for (index, c) in self.clauses.iter().enumerate() {
            if c.width() != 1 {
                return Err(SolverError::NotBoolean {
                    index,
                    width: c.width(),
                });
            }
            for v in c.vars() {
                if !self.vars.contains(&v) {
                    return Err(SolverError::Undeclared {
                        index,
                        var: v.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Total width of the variables the clauses actually mention.
    pub fn input_bits(&self) -> u32 {
        let mut used = BTreeSet::new();
        for c in &self.clauses {
            used.extend(c.vars());
        }
        used.iter().map(|v| v.width as u32).sum()
    }

    pub fn subset(&self, keep: &[usize]) -> Query {
        Query {
            clauses: keep.iter().map(|&i| self.clauses[i].clone()).collect(),
            vars: self.vars.clone(),
        }
    }

    /// Whether `model` satisfies every clause.
    pub fn satisfied_by(&self, model: &Assignment) -> bool {
        let mut ev = Evaluator::new(model);
        self.clauses.iter().all(|c| ev.holds(c).unwrap_or(false))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SatResult {
    Sat(Assignment),
    /// Indices into the query's clauses.
    Unsat(Vec<usize>),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Assignment> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat(_) => None,
        }
    }
}

/// Decides `q` with the default budget.
pub fn is_sat(q: &Query) -> Result<SatResult, SolverError> {
    is_sat_with_budget(q, DEFAULT_BUDGET_BITS)
}

pub fn is_sat_with_budget(q: &Query, budget_bits: u32) -> Result<SatResult, SolverError> {
    q.validate()?;
    let bits = q.input_bits();
    if bits > budget_bits {
        return Err(SolverError::BudgetExceeded {
            bits,
            limit: budget_bits,
        });
    }
    let mut inc = Incremental::new(q);
    Ok(inc.solve(&(0..q.clauses.len()).collect::<Vec<_>>()))
}

/// One blasted query that can be re-solved over clause subsets.
struct Incremental<'q> {
    q: &'q Query,
    b: Blaster,
    roots: Vec<sat::Lit>,
}

impl<'q> Incremental<'q> {
    fn new(q: &'q Query) -> Self {
        let mut b = Blaster::new();
        let roots = q.clauses.iter().map(|c| b.blast(c)[0]).collect();
        Incremental { q, b, roots }
    }

    fn solve(&mut self, active: &[usize]) -> SatResult {
        if let Some(&i) = active.iter().find(|&&i| self.b.is_false_lit(self.roots[i])) {
            return SatResult::Unsat(vec![i]);
        }
        let mut owners: HashMap<sat::Lit, Vec<usize>> = HashMap::new();
        let mut assumptions = Vec::new();
        for &i in active {
            let r = self.roots[i];
            if self.b.is_true_lit(r) {
                continue;
            }
            let e = owners.entry(r).or_default();
            if e.is_empty() {
                assumptions.push(r);
            }
            e.push(i);
        }
        match self.b.sat.solve(&assumptions) {
            Outcome::Sat => {
                let mut m = Assignment::new();
                for v in &self.q.vars {
                    let value = self.b.var_bits(v).map(|bits| self.b.read(bits)).unwrap_or(0);
                    m.insert(v, value);
                }
                SatResult::Sat(m)
            }
            Outcome::Unsat(failed) => {
                let mut core: Vec<usize> = failed
                    .iter()
                    .filter_map(|l| owners.get(l))
                    .flat_map(|v| v.iter().copied())
                    .collect();
                core.sort_unstable();
                core.dedup();
                SatResult::Unsat(core)
            }
        }
    }
}

/// Deletion-based core minimization. The result is irreducible: dropping
/// any one of its clauses makes the rest satisfiable.
pub fn minimize_core(q: &Query) -> Result<Vec<usize>, SolverError> {
    minimize_core_with_budget(q, DEFAULT_BUDGET_BITS)
}

pub fn minimize_core_with_budget(q: &Query, budget_bits: u32) -> Result<Vec<usize>, SolverError> {
    let start = match is_sat_with_budget(q, budget_bits)? {
        SatResult::Sat(_) => return Err(SolverError::NotUnsat),
        SatResult::Unsat(core) => core,
    };
    let mut inc = Incremental::new(q);
    Ok(shrink(&mut inc, start))
}

fn shrink(inc: &mut Incremental<'_>, mut core: Vec<usize>) -> Vec<usize> {
    let mut i = 0;
    while i < core.len() {
        let mut trial = core.clone();
        trial.remove(i);
        match inc.solve(&trial) {
            SatResult::Sat(_) => i += 1,
            // The refutation may need even fewer clauses; keep only those.
            SatResult::Unsat(smaller) => core = smaller,
        }
    }
    core
}

// ---- caches ---------------------------------------------------------------

/// Unsat cores as sets of clause identities. Entries are never removed.
#[derive(Default)]
pub struct CoreCache {
    cores: RwLock<Vec<BTreeSet<u64>>>,
}

impl CoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cores.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, core: BTreeSet<u64>) {
        let mut w = self.cores.write();
        if !w.contains(&core) {
            w.push(core);
        }
    }

    /// A cached core contained in `clause_ids`, if any.
    pub fn find_subset(&self, clause_ids: &HashSet<u64>) -> Option<BTreeSet<u64>> {
        self.cores
            .read()
            .iter()
            .find(|c| c.iter().all(|id| clause_ids.contains(id)))
            .cloned()
    }

    pub fn snapshot(&self) -> Vec<BTreeSet<u64>> {
        self.cores.read().clone()
    }
}

/// Most-recently-used list of satisfying models.
pub struct ModelCache {
    capacity: usize,
    models: Mutex<VecDeque<Assignment>>,
}

impl Default for ModelCache {
    fn default() -> Self {
        Self::new(DEFAULT_MODEL_CACHE)
    }
}

impl ModelCache {
    pub fn new(capacity: usize) -> Self {
        ModelCache {
            capacity,
            models: Mutex::new(VecDeque::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.models.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, m: Assignment) {
        let mut g = self.models.lock();
        if let Some(pos) = g.iter().position(|x| *x == m) {
            g.remove(pos);
        }
        g.push_front(m);
        g.truncate(self.capacity);
    }

    /// First cached model satisfying `q`, completed with zeros over the
    /// query's domain. A hit moves to the front.
    pub fn find(&self, q: &Query) -> Option<Assignment> {
        let mut g = self.models.lock();
        let pos = g.iter().position(|m| q.satisfied_by(&m.completed(&q.vars)))?;
        let m = g.remove(pos).unwrap();
        let out = m.completed(&q.vars);
        g.push_front(m);
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HitKind {
    CoreHit,
    ModelHit,
    Solved,
}

/// Consults the core cache, then the model cache, then solves. Unsat cores
/// are minimized before caching.
pub fn check_with_caches(
    q: &Query,
    cores: &CoreCache,
    models: &ModelCache,
    budget_bits: u32,
) -> Result<(SatResult, HitKind), SolverError> {
    q.validate()?;
    let ids: HashSet<u64> = q.clauses.iter().map(Term::id).collect();
    if let Some(core) = cores.find_subset(&ids) {
        let mut idx: Vec<usize> = Vec::new();
        for id in &core {
            if let Some(i) = q.clauses.iter().position(|c| c.id() == *id) {
                idx.push(i);
            }
        }
        idx.sort_unstable();
        return Ok((SatResult::Unsat(idx), HitKind::CoreHit));
    }
    if let Some(m) = models.find(q) {
        return Ok((SatResult::Sat(m), HitKind::ModelHit));
    }
    let bits = q.input_bits();
    if bits > budget_bits {
        return Err(SolverError::BudgetExceeded {
            bits,
            limit: budget_bits,
        });
    }
    let mut inc = Incremental::new(q);
    let all: Vec<usize> = (0..q.clauses.len()).collect();
    let r = match inc.solve(&all) {
        SatResult::Sat(m) => {
            models.insert(m.clone());
            SatResult::Sat(m)
        }
        SatResult::Unsat(core) => {
            let core = shrink(&mut inc, core);
            cores.insert(core.iter().map(|&i| q.clauses[i].id()).collect());
            SatResult::Unsat(core)
        }
    };
    Ok((r, HitKind::Solved))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub queries: u64,
    pub solved: u64,
    pub core_hits: u64,
    pub model_hits: u64,
}

/// Session solver: a budget, optional caches, and counters.
pub struct Solver {
    pub budget_bits: u32,
    caching: bool,
    cores: CoreCache,
    models: ModelCache,
    queries: AtomicU64,
    solved: AtomicU64,
    core_hits: AtomicU64,
    model_hits: AtomicU64,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(DEFAULT_BUDGET_BITS)
    }
}

impl Solver {
    pub fn new(budget_bits: u32) -> Self {
        Solver {
            budget_bits,
            caching: true,
            cores: CoreCache::new(),
            models: ModelCache::default(),
            queries: AtomicU64::new(0),
            solved: AtomicU64::new(0),
            core_hits: AtomicU64::new(0),
            model_hits: AtomicU64::new(0),
        }
    }

    pub fn without_caches(budget_bits: u32) -> Self {
        Solver {
            caching: false,
            ..Solver::new(budget_bits)
        }
    }

    pub fn caching(&self) -> bool {
        self.caching
    }

    pub fn cores(&self) -> &CoreCache {
        &self.cores
    }

    pub fn models(&self) -> &ModelCache {
        &self.models
    }

    pub fn check(&self, q: &Query) -> Result<(SatResult, HitKind), SolverError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let (r, kind) = if self.caching {
            check_with_caches(q, &self.cores, &self.models, self.budget_bits)?
        } else {
            (is_sat_with_budget(q, self.budget_bits)?, HitKind::Solved)
        };
        let counter = match kind {
            HitKind::CoreHit => &self.core_hits,
            HitKind::ModelHit => &self.model_hits,
            HitKind::Solved => &self.solved,
        };
        counter.fetch_add(1, Ordering::Relaxed);
        Ok((r, kind))
    }

    pub fn solve(&self, q: &Query) -> Result<SatResult, SolverError> {
        self.check(q).map(|(r, _)| r)
    }

    /// Convenience: satisfiability of `clauses` over their own variables.
    pub fn sat(&self, clauses: Vec<Term>) -> Result<Option<Assignment>, SolverError> {
        Ok(match self.solve(&Query::new(clauses))? {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat(_) => None,
        })
    }

    pub fn stats(&self) -> SolverStats {
        SolverStats {
            queries: self.queries.load(Ordering::Relaxed),
            solved: self.solved.load(Ordering::Relaxed),
            core_hits: self.core_hits.load(Ordering::Relaxed),
            model_hits: self.model_hits.load(Ordering::Relaxed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x8() -> Term {
        Term::var("x", 8)
    }

    fn c8(v: u32) -> Term {
        Term::constant(v, 8)
    }

    #[test]
    fn range_query() {
        let q = Query::new(vec![x8().ult(&c8(5)), c8(2).ult(&x8())]);
        let m = is_sat(&q).unwrap().model().cloned().unwrap();
        assert!([3, 4].contains(&m.get("x").unwrap()));
    }

    #[test]
    fn contradiction_core() {
        let q = Query::new(vec![x8().eq_(&c8(1)), x8().eq_(&c8(2))]);
        assert_eq!(is_sat(&q).unwrap(), SatResult::Unsat(vec![0, 1]));
    }

    #[test]
    fn empty_query() {
        assert!(is_sat(&Query::new(vec![])).unwrap().is_sat());
    }

    #[test]
    fn one_bit_var() {
        let v = Term::var("v", 1);
        let m = is_sat(&Query::new(vec![v])).unwrap();
        assert_eq!(m.model().unwrap().get("v"), Some(1));
    }

    #[test]
    fn minimization_drops_irrelevant_clause() {
        let y = Term::var("y", 8);
        let q = Query::new(vec![x8().eq_(&c8(1)), x8().eq_(&c8(2)), y.ult(&c8(9))]);
        assert_eq!(minimize_core(&q).unwrap(), vec![0, 1]);
        let q = Query::new(vec![Term::ff()]);
        assert_eq!(minimize_core(&q).unwrap(), vec![0]);
        assert_eq!(
            minimize_core(&Query::new(vec![Term::tt()])),
            Err(SolverError::NotUnsat)
        );
    }

    #[test]
    fn budget_is_enforced() {
        let a = Term::var("big_a", 32);
        let q = Query::new(vec![a.eq_(&Term::constant(3, 32))]);
        assert!(matches!(is_sat(&q), Err(SolverError::BudgetExceeded { bits: 32, limit: 24 })));
        assert!(is_sat_with_budget(&q, 32).unwrap().is_sat());
    }

    #[test]
    fn core_and_model_hits() {
        let s = Solver::new(24);
        let y = Term::var("y", 8);
        let (r, k) = s.check(&Query::new(vec![x8().eq_(&c8(1)), x8().eq_(&c8(2))])).unwrap();
        assert!(!r.is_sat());
        assert_eq!(k, HitKind::Solved);
        let (r, k) = s
            .check(&Query::new(vec![x8().eq_(&c8(1)), x8().eq_(&c8(2)), y.ult(&c8(3))]))
            .unwrap();
        assert_eq!(k, HitKind::CoreHit);
        assert_eq!(r, SatResult::Unsat(vec![0, 1]));

        s.models().insert(Assignment::new().with("x", 3));
        let (r, k) = s.check(&Query::new(vec![x8().ult(&c8(5))])).unwrap();
        assert_eq!(k, HitKind::ModelHit);
        assert_eq!(r.model().unwrap().get("x"), Some(3));
        assert_eq!(s.stats().solved, 1);
    }

    #[test]
    fn model_cache_is_bounded() {
        let c = ModelCache::new(3);
        for i in 0..5 {
            c.insert(Assignment::new().with("x", i));
        }
        assert_eq!(c.len(), 3);
        let q = Query::new(vec![x8().eq_(&c8(4))]);
        assert!(c.find(&q).is_some());
        let q = Query::new(vec![x8().eq_(&c8(0))]);
        assert!(c.find(&q).is_none());
    }

    #[test]
    fn word_arithmetic_agrees_with_eval() {
        // x + x == 2 * x holds for every 8-bit x.
        let x = x8();
        let q = Query::new(vec![x.add(&x).ne_(&x.mul(&c8(2)))]);
        assert!(!is_sat(&q).unwrap().is_sat());
        let q = Query::new(vec![x.shrl(&Term::var("s", 8)).eq_(&c8(1)), x.eq_(&c8(0x80))]);
        let m = is_sat(&q).unwrap().model().cloned().unwrap();
        assert_eq!(m.get("s"), Some(7));
    }
}
