//! A small CDCL SAT solver: two watched literals, first-UIP learning,
//! VSIDS-style branching, phase saving, Luby restarts, and solving under
//! assumptions with failed-assumption extraction.

pub type Lit = u32;

pub fn mk_lit(var: u32, negated: bool) -> Lit {
    (var << 1) | negated as u32
}

pub fn var_of(l: Lit) -> usize {
    (l >> 1) as usize
}

pub fn negate(l: Lit) -> Lit {
    l ^ 1
}

fn sign(l: Lit) -> bool {
    l & 1 == 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Sat,
    /// The subset of assumptions involved in the refutation.
    Unsat(Vec<Lit>),
}

#[derive(Default)]
struct VarHeap {
    heap: Vec<usize>,
    index: Vec<Option<usize>>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.index.resize(n, None);
    }

    fn contains(&self, v: usize) -> bool {
        self.index[v].is_some()
    }

    fn less(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if !Self::less(act, v, self.heap[p]) {
                break;
            }
            self.heap[i] = self.heap[p];
            self.index[self.heap[i]] = Some(i);
            i = p;
        }
        self.heap[i] = v;
        self.index[v] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let c = if r < self.heap.len() && Self::less(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            if !Self::less(act, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.index[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.index[v] = Some(i);
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.index[v] = Some(i);
        self.up(i, act);
    }

    fn bumped(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.index[v] {
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.index[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }
}

pub struct SatSolver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    heap: VarHeap,
    ok: bool,
    pub conflicts: u64,
}

impl Default for SatSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl SatSolver {
    pub fn new() -> Self {
        SatSolver {
            clauses: Vec::new(),
            watches: Vec::new(),
            value: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            phase: Vec::new(),
            seen: Vec::new(),
            heap: VarHeap::default(),
            ok: true,
            conflicts: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.value.len()
    }

    pub fn new_var(&mut self) -> u32 {
        let v = self.value.len();
        self.value.push(None);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.grow(v + 1);
        self.heap.insert(v, &self.activity);
        v as u32
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value[var_of(l)].map(|v| v != sign(l))
    }

    /// Value of a variable in the last satisfying assignment.
    pub fn model_value(&self, var: u32) -> bool {
        self.value[var as usize].unwrap_or(false)
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause, discarding any assignment left by the previous solve.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        self.cancel_until(0);
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            match self.lit_value(l) {
                Some(true) => return,
                Some(false) => continue,
                None => {
                    if c.contains(&negate(l)) {
                        return;
                    }
                    if !c.contains(&l) {
                        c.push(l);
                    }
                }
            }
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let idx = self.clauses.len();
        self.watches[negate(c[0]) as usize].push(idx);
        self.watches[negate(c[1]) as usize].push(idx);
        self.clauses.push(c);
        idx
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = var_of(l);
        self.value[v] = Some(!sign(l));
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Returns the index of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            // Clauses watching ¬p, i.e. registered under p becoming true.
            let mut ws = std::mem::take(&mut self.watches[p as usize]);
            let false_lit = negate(p);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let clause = &mut self.clauses[ci];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if self.value[var_of(first)].map(|v| v != sign(first)) == Some(true) {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    if self.value[var_of(l)].map(|v| v != sign(l)) != Some(false) {
                        clause.swap(1, k);
                        let new_watch = negate(clause[1]) as usize;
                        self.watches[new_watch].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                match self.lit_value(first) {
                    Some(false) => {
                        conflict = Some(ci);
                        break;
                    }
                    _ => {
                        self.enqueue(first, Some(ci));
                        i += 1;
                    }
                }
            }
            let existing = std::mem::replace(&mut self.watches[p as usize], ws);
            self.watches[p as usize].extend(existing);
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let start = if p.is_some() { 1 } else { 0 };
            let clause = self.clauses[confl].clone();
            for &q in &clause[start..] {
                let v = var_of(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var_of(self.trail[idx])] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[var_of(pl)] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[var_of(pl)].expect("implied literal has a reason");
        }
        learnt[0] = negate(p.unwrap());
        for &l in &learnt[1..] {
            self.seen[var_of(l)] = false;
        }
        let bt = if learnt.len() == 1 {
            0
        } else {
            let (mut max_i, mut max_lvl) = (1, self.level[var_of(learnt[1])]);
            for (i, &l) in learnt.iter().enumerate().skip(2) {
                if self.level[var_of(l)] > max_lvl {
                    max_i = i;
                    max_lvl = self.level[var_of(l)];
                }
            }
            learnt.swap(1, max_i);
            max_lvl
        };
        self.var_inc /= 0.95;
        (learnt, bt)
    }

    /// Negations of the assumptions responsible for `p` being false.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut out = vec![p];
        if self.decision_level() == 0 {
            return out;
        }
        self.seen[var_of(p)] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let x = var_of(self.trail[i]);
            if self.seen[x] {
                match self.reason[x] {
                    None => out.push(negate(self.trail[i])),
                    Some(c) => {
                        for j in 1..self.clauses[c].len() {
                            let v = var_of(self.clauses[c][j]);
                            if self.level[v] > 0 {
                                self.seen[v] = true;
                            }
                        }
                    }
                }
                self.seen[x] = false;
            }
        }
        self.seen[var_of(p)] = false;
        out
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = var_of(l);
            self.phase[v] = !sign(l);
            self.value[v] = None;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn luby(mut i: u64) -> u64 {
        let mut size = 1u64;
        let mut seq = 0u32;
        while size < i + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != i {
            size = (size - 1) >> 1;
            seq -= 1;
            i %= size;
        }
        1u64 << seq
    }

    /// Solves under `assumptions`. On `Sat`, [`model_value`](Self::model_value)
    /// reads the assignment until the next call.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Outcome {
        self.cancel_until(0);
        if !self.ok {
            return Outcome::Unsat(vec![]);
        }
        let mut restarts = 0u64;
        loop {
            let budget = 100 * Self::luby(restarts);
            restarts += 1;
            if let Some(outcome) = self.search(budget, assumptions) {
                if outcome == Outcome::Unsat(vec![]) {
                    self.cancel_until(0);
                }
                return outcome;
            }
        }
    }

    fn search(&mut self, conflict_budget: u64, assumptions: &[Lit]) -> Option<Outcome> {
        let mut local = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                local += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(Outcome::Unsat(vec![]));
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                continue;
            }
            if local >= conflict_budget {
                self.cancel_until(0);
                return None;
            }
            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let p = assumptions[self.decision_level() as usize];
                match self.lit_value(p) {
                    Some(true) => self.trail_lim.push(self.trail.len()),
                    Some(false) => {
                        let core = self.analyze_final(negate(p));
                        self.cancel_until(0);
                        let failed = core.into_iter().map(negate).collect();
                        return Some(Outcome::Unsat(failed));
                    }
                    None => {
                        next = Some(p);
                        break;
                    }
                }
            }
            let decision = match next {
                Some(p) => p,
                None => loop {
                    match self.heap.pop(&self.activity) {
                        None => return Some(Outcome::Sat),
                        Some(v) if self.value[v].is_none() => {
                            break mk_lit(v as u32, !self.phase[v]);
                        }
                        Some(_) => {}
                    }
                },
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(decision, None);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(s: &mut SatSolver, n: usize) -> Vec<u32> {
        (0..n).map(|_| s.new_var()).collect()
    }

    #[test]
    fn simple_sat_and_unsat() {
        let mut s = SatSolver::new();
        let v = lits(&mut s, 3);
        let p = |i: usize| mk_lit(v[i], false);
        let n = |i: usize| mk_lit(v[i], true);
        s.add_clause(&[p(0), p(1)]);
        s.add_clause(&[n(0), p(2)]);
        s.add_clause(&[n(1), p(2)]);
        assert_eq!(s.solve(&[]), Outcome::Sat);
        assert!(s.model_value(v[2]));
        match s.solve(&[n(2)]) {
            Outcome::Unsat(core) => assert_eq!(core, vec![n(2)]),
            o => panic!("{o:?}"),
        }
        assert_eq!(s.solve(&[p(2)]), Outcome::Sat);
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 4 pigeons, 3 holes.
        let mut s = SatSolver::new();
        let x: Vec<Vec<u32>> = (0..4).map(|_| lits(&mut s, 3)).collect();
        for p in &x {
            let c: Vec<Lit> = p.iter().map(|&v| mk_lit(v, false)).collect();
            s.add_clause(&c);
        }
        #[allow(clippy::needless_range_loop)]
        for h in 0..3 {
            for a in 0..4 {
                for b in a + 1..4 {
                    s.add_clause(&[mk_lit(x[a][h], true), mk_lit(x[b][h], true)]);
                }
            }
        }
        assert_eq!(s.solve(&[]), Outcome::Unsat(vec![]));
    }

    #[test]
    fn failed_assumptions_are_a_subset() {
        let mut s = SatSolver::new();
        let v = lits(&mut s, 4);
        // a -> c, b -> !c; d is irrelevant.
        s.add_clause(&[mk_lit(v[0], true), mk_lit(v[2], false)]);
        s.add_clause(&[mk_lit(v[1], true), mk_lit(v[2], true)]);
        let a = [mk_lit(v[3], false), mk_lit(v[0], false), mk_lit(v[1], false)];
        match s.solve(&a) {
            Outcome::Unsat(mut core) => {
                core.sort();
                assert_eq!(core, vec![mk_lit(v[0], false), mk_lit(v[1], false)]);
            }
            o => panic!("{o:?}"),
        }
    }
}
