//! Joint concolic exploration of both programs.
//!
//! One concrete input drives both programs at once. Children of a fork that
//! the input does not follow are deferred; a later input, solved from a
//! deferred state's constraints, reactivates every deferred state it
//! satisfies in either program.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::symexec::{ExecError, Explorer, Harness, RunResult, Side, SymState};
use crate::solver::{Query, SatResult, Solver, SolverError};
use crate::term::{Assignment, Evaluator, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    Complete,
    Coverage(f64),
    Cyclomatic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Candidate {
    Trivial,
    NGram(usize),
}

pub fn parse_termination(text: &str) -> Result<Termination, String> {
    match text.trim() {
        "complete" => Ok(Termination::Complete),
        "cyclomatic" => Ok(Termination::Cyclomatic),
        t => {
            let tau = t
                .strip_prefix("coverage:")
                .ok_or_else(|| format!("unknown termination heuristic `{t}`"))?;
            let tau: f64 = tau.parse().map_err(|_| format!("bad coverage fraction `{tau}`"))?;
            if !(0.0..=1.0).contains(&tau) {
                return Err(format!("coverage fraction {tau} is outside [0, 1]"));
            }
            Ok(Termination::Coverage(tau))
        }
    }
}

pub fn parse_candidate(text: &str) -> Result<Candidate, String> {
    match text.trim() {
        "trivial" => Ok(Candidate::Trivial),
        t => {
            let n = t
                .strip_prefix("ngram:")
                .ok_or_else(|| format!("unknown candidate heuristic `{t}`"))?;
            match n.parse::<usize>() {
                Ok(n) if n > 0 => Ok(Candidate::NGram(n)),
                _ => Err(format!("bad n-gram length `{n}`")),
            }
        }
    }
}

/// Length-`n` windows of a block history.
pub fn windows(history: &[u32], n: usize) -> BTreeSet<Vec<u32>> {
    history.windows(n).map(|w| w.to_vec()).collect()
}

#[derive(Clone, Debug)]
pub struct Deferred {
    pub state: SymState,
    pub side: Side,
    /// Insertion order, for FIFO tie-breaks.
    pub seq: u64,
}

/// Splits successors into those the input follows and those it does not.
/// A child is active iff every constraint it added beyond its parent's
/// holds under `input`.
pub fn step_children(parent_len: usize, children: Vec<SymState>, input: &Assignment) -> (Vec<SymState>, Vec<SymState>) {
    let mut active = Vec::new();
    let mut deferred = Vec::new();
    for c in children {
        if satisfies(input, &c.constraints[parent_len.min(c.constraints.len())..]) {
            active.push(c);
        } else {
            deferred.push(c);
        }
    }
    (active, deferred)
}

fn total(input: &Assignment, terms: &[Term]) -> Assignment {
    let mut a = input.clone();
    for t in terms {
        for v in t.vars() {
            if !a.contains(&v.name) {
                a.insert(&v, 0);
            }
        }
    }
    a
}

/// Whether `input`, extended with zeros, satisfies every term.
pub fn satisfies(input: &Assignment, terms: &[Term]) -> bool {
    let a = total(input, terms);
    let mut ev = Evaluator::new(&a);
    terms.iter().all(|t| ev.holds(t).unwrap_or(false))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputLogEntry {
    pub round: usize,
    /// `preconditions` for the first input, else `<side>:<node>` of the
    /// candidate it was solved from.
    pub source: String,
    pub input: Assignment,
    /// Whether the input differs from every earlier one.
    pub fresh: bool,
    pub activated_pre: usize,
    pub activated_post: usize,
}

#[derive(Clone, Debug)]
pub struct ConcolicResult {
    pub pre: RunResult,
    pub post: RunResult,
    pub log: Vec<InputLogEntry>,
    pub deferred_left: [usize; 2],
    pub stop_reason: String,
}

impl ConcolicResult {
    pub fn run(&self, side: Side) -> &RunResult {
        match side {
            Side::Pre => &self.pre,
            Side::Post => &self.post,
        }
    }
}

fn idx(side: Side) -> usize {
    match side {
        Side::Pre => 0,
        Side::Post => 1,
    }
}

/// Session state across rounds.
pub struct Session<'h> {
    explorers: [Explorer<'h>; 2],
    pub input: Assignment,
    pub deferred: [VecDeque<Deferred>; 2],
    pub terminals: [Vec<SymState>; 2],
    pub covered: [BTreeSet<u32>; 2],
    pub seen: BTreeSet<Vec<u32>>,
    pub turn: Side,
    n: usize,
    seq: u64,
    states: usize,
    limit: usize,
    declared: BTreeSet<Var>,
}

impl<'h> Session<'h> {
    fn note_history(&mut self, side: Side, s: &SymState) {
        self.covered[idx(side)].extend(s.block_history.iter().copied());
        self.seen.extend(windows(&s.block_history, self.n));
    }

    fn defer(&mut self, side: Side, state: SymState) {
        self.seq += 1;
        self.deferred[idx(side)].push_back(Deferred {
            state,
            side,
            seq: self.seq,
        });
    }

    /// Runs a frontier to quiescence under the current input.
    fn run_frontier(&mut self, side: Side, mut frontier: VecDeque<SymState>) -> Result<(), ExecError> {
        while let Some(s) = frontier.pop_front() {
            if s.is_terminal() {
                self.note_history(side, &s);
                self.terminals[idx(side)].push(s);
                continue;
            }
            let len = s.constraints.len();
            let children = self.explorers[idx(side)].step(s)?;
            self.states += children.len();
            if self.states > self.limit {
                return Err(ExecError::StateLimit { limit: self.limit });
            }
            let (active, deferred) = step_children(len, children, &self.input);
            for d in deferred {
                self.defer(side, d);
            }
            frontier.extend(active);
        }
        Ok(())
    }

    /// Moves every deferred state the input satisfies to a new frontier.
    fn activate(&mut self, side: Side) -> VecDeque<SymState> {
        let queue = std::mem::take(&mut self.deferred[idx(side)]);
        let mut out = VecDeque::new();
        for d in queue {
            if satisfies(&self.input, &d.state.constraints) {
                out.push_back(d.state);
            } else {
                self.deferred[idx(side)].push_back(d);
            }
        }
        out
    }

    pub fn should_stop(&self, t: Termination) -> bool {
        let exhausted = self.deferred.iter().all(|d| d.is_empty());
        exhausted
            || match t {
                Termination::Complete => false,
                Termination::Coverage(tau) => (0..2).all(|i| {
                    let total = crate::isa::block_leaders(self.explorers[i].program()).len();
                    self.covered[i].len() as f64 >= tau * total as f64
                }),
                Termination::Cyclomatic => (0..2).all(|i| {
                    let m = crate::isa::cyclomatic_complexity(self.explorers[i].program());
                    self.terminals[i].len() >= m
                }),
            }
    }

    /// Removes and returns the next candidate. The turn flips after a pick,
    /// and skips a program with nothing deferred.
    pub fn pick(&mut self, c: Candidate) -> Option<Deferred> {
        let side = if !self.deferred[idx(self.turn)].is_empty() {
            self.turn
        } else if !self.deferred[idx(self.turn.other())].is_empty() {
            self.turn.other()
        } else {
            return None;
        };
        self.turn = side.other();
        let q = &mut self.deferred[idx(side)];
        let at = match c {
            Candidate::Trivial => 0,
            Candidate::NGram(n) => pick_ngram(q.iter().map(|d| d.state.block_history.as_slice()), n, &self.seen),
        };
        q.remove(at)
    }

    /// A total input satisfying the candidate's constraints, preferring one not
    /// already in the log.
    fn fresh_input(&self, d: &Deferred, solver: &Solver, log: &[InputLogEntry]) -> Result<(Assignment, bool), SolverError> {
        let mut domain = BTreeSet::new();
        for c in &d.state.constraints {
            domain.extend(c.vars());
        }
        let base = d.state.witness.clone();
        let complete = |a: &Assignment| {
            let mut a = a.clone();
            for v in &self.declared {
                if !a.contains(&v.name) {
                    a.insert(v, 0);
                }
            }
            a
        };
        if !domain.is_empty() {
            let mut clauses = d.state.constraints.clone();
            for e in log {
                let differs: Vec<Term> = domain
                    .iter()
                    .map(|v| Term::from_var(v).ne_(&Term::constant(e.input.get(&v.name).unwrap_or(0), v.width)))
                    .collect();
                clauses.push(Term::any(&differs));
            }
            match solver.solve(&Query::new(clauses)) {
                Ok(SatResult::Sat(m)) => return Ok((complete(&m.merged(&base)), true)),
                Ok(SatResult::Unsat(_)) | Err(SolverError::BudgetExceeded { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let a = complete(&base);
        let fresh = log.iter().all(|e| e.input != a);
        Ok((a, fresh))
    }
}

/// Index of the history with the most distinct unseen length-`n` windows;
/// the earliest wins ties.
pub fn pick_ngram<'a>(histories: impl Iterator<Item = &'a [u32]>, n: usize, seen: &BTreeSet<Vec<u32>>) -> usize {
    let mut best = (0usize, 0usize);
    for (i, h) in histories.enumerate() {
        let score = windows(h, n).iter().filter(|w| !seen.contains(*w)).count();
        if i == 0 || score > best.1 {
            best = (i, score);
        }
    }
    best.0
}

/// Concolic exploration of both programs of a harness.
pub fn execute_concolic(h: &Harness, solver: &Solver) -> Result<ConcolicResult, ExecError> {
    let termination = parse_termination(&h.config.heuristics.termination).expect("validated at load");
    let candidate = parse_candidate(&h.config.heuristics.candidate).expect("validated at load");
    let n = match candidate {
        Candidate::NGram(n) => n,
        Candidate::Trivial => 2,
    };
    let mut session = Session {
        explorers: [Explorer::new(h, Side::Pre, solver), Explorer::new(h, Side::Post, solver)],
        input: Assignment::new(),
        deferred: [VecDeque::new(), VecDeque::new()],
        terminals: [vec![], vec![]],
        covered: [BTreeSet::new(), BTreeSet::new()],
        seen: BTreeSet::new(),
        turn: Side::Pre,
        n,
        seq: 0,
        states: 0,
        limit: h.config.state_limit,
        declared: h.declared_vars(),
    };
    let roots = [session.explorers[0].root()?, session.explorers[1].root()?];
    let mut input = roots[0].witness.clone();
    for v in &session.declared {
        if !input.contains(&v.name) {
            input.insert(v, 0);
        }
    }
    session.input = input;
    let mut log = vec![InputLogEntry {
        round: 0,
        source: "preconditions".into(),
        input: session.input.clone(),
        fresh: true,
        activated_pre: 1,
        activated_post: 1,
    }];
    let [pre_root, post_root] = roots;
    session.run_frontier(Side::Pre, VecDeque::from([pre_root]))?;
    session.run_frontier(Side::Post, VecDeque::from([post_root]))?;

    let mut round = 0;
    let stop_reason = loop {
        if session.should_stop(termination) {
            break if session.deferred.iter().all(|d| d.is_empty()) {
                "exhausted".to_string()
            } else {
                format!("{:?}", termination).to_lowercase()
            };
        }
        let d = session.pick(candidate).expect("some deferred state remains");
        round += 1;
        let (input, fresh) = session.fresh_input(&d, solver, &log)?;
        session.input = input;
        let source = format!("{}:{}", d.side, d.state.node_id);
        let side = d.side;
        let mut frontiers = [session.activate(Side::Pre), session.activate(Side::Post)];
        frontiers[idx(side)].push_front(d.state);
        log.push(InputLogEntry {
            round,
            source,
            input: session.input.clone(),
            fresh,
            activated_pre: frontiers[0].len(),
            activated_post: frontiers[1].len(),
        });
        let [pre_f, post_f] = frontiers;
        session.run_frontier(Side::Pre, pre_f)?;
        session.run_frontier(Side::Post, post_f)?;
    };

    let deferred_left = [session.deferred[0].len(), session.deferred[1].len()];
    let [pre_t, post_t] = session.terminals;
    let [pre_x, post_x] = session.explorers;
    Ok(ConcolicResult {
        pre: pre_x.finish(pre_t),
        post: post_x.finish(post_t),
        log,
        deferred_left,
        stop_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristics_parse() {
        assert_eq!(parse_termination("complete"), Ok(Termination::Complete));
        assert_eq!(parse_termination("coverage:0.5"), Ok(Termination::Coverage(0.5)));
        assert!(parse_termination("coverage:1.5").is_err());
        assert!(parse_termination("often").is_err());
        assert_eq!(parse_candidate("ngram:3"), Ok(Candidate::NGram(3)));
        assert_eq!(parse_candidate("trivial"), Ok(Candidate::Trivial));
        assert!(parse_candidate("ngram:0").is_err());
    }

    #[test]
    fn ngram_prefers_novel_history() {
        let (a, b, c, d) = (1, 2, 3, 4);
        let seen: BTreeSet<Vec<u32>> = [vec![a, b]].into_iter().collect();
        let h1 = [a, b, a, b];
        let h2 = [a, b, c, d];
        assert_eq!(pick_ngram([&h1[..], &h2[..]].into_iter(), 2, &seen), 1);
        assert_eq!(pick_ngram([&h1[..]].into_iter(), 2, &seen), 0);
        // equal scores keep FIFO order
        assert_eq!(pick_ngram([&h2[..], &h2[..]].into_iter(), 2, &seen), 0);
    }
}
