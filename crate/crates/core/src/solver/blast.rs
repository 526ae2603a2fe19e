//! Tseitin bit-blasting of terms into CNF.

use std::collections::HashMap;

use super::sat::{mk_lit, negate, var_of, Lit, SatSolver};
use crate::term::{BinOp, Kind, Term, Var};

pub struct Blaster {
    pub sat: SatSolver,
    t: Lit,
    bits: HashMap<u64, Vec<Lit>>,
    vars: HashMap<Var, Vec<Lit>>,
}

impl Default for Blaster {
    fn default() -> Self {
        Self::new()
    }
}

impl Blaster {
    pub fn new() -> Self {
        let mut sat = SatSolver::new();
        let v = sat.new_var();
        let t = mk_lit(v, false);
        sat.add_clause(&[t]);
        Blaster {
            sat,
            t,
            bits: HashMap::new(),
            vars: HashMap::new(),
        }
    }

    fn f(&self) -> Lit {
        negate(self.t)
    }

    fn fresh(&mut self) -> Lit {
        mk_lit(self.sat.new_var(), false)
    }

    fn konst(&self, b: bool) -> Lit {
        if b {
            self.t
        } else {
            self.f()
        }
    }

    fn and2(&mut self, a: Lit, b: Lit) -> Lit {
        let (t, f) = (self.t, self.f());
        if a == f || b == f || a == negate(b) {
            return f;
        }
        if a == t || a == b {
            return b;
        }
        if b == t {
            return a;
        }
        let o = self.fresh();
        self.sat.add_clause(&[negate(o), a]);
        self.sat.add_clause(&[negate(o), b]);
        self.sat.add_clause(&[o, negate(a), negate(b)]);
        o
    }

    fn or2(&mut self, a: Lit, b: Lit) -> Lit {
        negate(self.and2(negate(a), negate(b)))
    }

    fn xor2(&mut self, a: Lit, b: Lit) -> Lit {
        let (t, f) = (self.t, self.f());
        if a == f {
            return b;
        }
        if b == f {
            return a;
        }
        if a == t {
            return negate(b);
        }
        if b == t {
            return negate(a);
        }
        if a == b {
            return f;
        }
        if a == negate(b) {
            return t;
        }
        let o = self.fresh();
        self.sat.add_clause(&[negate(o), a, b]);
        self.sat.add_clause(&[negate(o), negate(a), negate(b)]);
        self.sat.add_clause(&[o, negate(a), b]);
        self.sat.add_clause(&[o, a, negate(b)]);
        o
    }

    /// `c ? a : b`
    fn mux(&mut self, c: Lit, a: Lit, b: Lit) -> Lit {
        if c == self.t || a == b {
            return a;
        }
        if c == self.f() {
            return b;
        }
        let o = self.fresh();
        self.sat.add_clause(&[negate(c), negate(a), o]);
        self.sat.add_clause(&[negate(c), a, negate(o)]);
        self.sat.add_clause(&[c, negate(b), o]);
        self.sat.add_clause(&[c, b, negate(o)]);
        o
    }

    fn full_add(&mut self, a: Lit, b: Lit, c: Lit) -> (Lit, Lit) {
        let ab = self.xor2(a, b);
        let sum = self.xor2(ab, c);
        let g = self.and2(a, b);
        let p = self.and2(ab, c);
        let carry = self.or2(g, p);
        (sum, carry)
    }

    fn adder(&mut self, a: &[Lit], b: &[Lit], carry_in: Lit) -> Vec<Lit> {
        let mut carry = carry_in;
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let (s, c) = self.full_add(a[i], b[i], carry);
            out.push(s);
            carry = c;
        }
        out
    }

    fn ult_bits(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        // Scan from the least significant bit; higher bits override.
        let mut lt = self.f();
        for i in 0..a.len() {
            let diff = self.xor2(a[i], b[i]);
            let b_wins = self.and2(negate(a[i]), b[i]);
            lt = self.mux(diff, b_wins, lt);
        }
        lt
    }

    fn eq_bits(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut acc = self.t;
        for i in 0..a.len() {
            let d = self.xor2(a[i], b[i]);
            acc = self.and2(acc, negate(d));
        }
        acc
    }

    fn shift(&mut self, op: BinOp, a: &[Lit], amt: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let fill = match op {
            BinOp::Shra => a[w - 1],
            _ => self.f(),
        };
        let mut cur = a.to_vec();
        let mut overflow = self.f();
        for (k, &bit) in amt.iter().enumerate() {
            let dist = 1usize.checked_shl(k as u32).unwrap_or(usize::MAX);
            if dist >= w {
                overflow = self.or2(overflow, bit);
                continue;
            }
            let mut next = Vec::with_capacity(w);
            for i in 0..w {
                let moved = match op {
                    BinOp::Shl => {
                        if i >= dist {
                            cur[i - dist]
                        } else {
                            self.f()
                        }
                    }
                    _ => {
                        if i + dist < w {
                            cur[i + dist]
                        } else {
                            fill
                        }
                    }
                };
                next.push(self.mux(bit, moved, cur[i]));
            }
            cur = next;
        }
        cur.into_iter().map(|l| self.mux(overflow, fill, l)).collect()
    }

    fn mul(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let mut acc = vec![self.f(); w];
        for (k, &bk) in b.iter().enumerate() {
            if bk == self.f() {
                continue;
            }
            let mut row = vec![self.f(); w];
            for i in k..w {
                row[i] = self.and2(a[i - k], bk);
            }
            let f = self.f();
            acc = self.adder(&acc, &row, f);
        }
        acc
    }

    pub fn var_bits(&self, v: &Var) -> Option<&[Lit]> {
        self.vars.get(v).map(|b| b.as_slice())
    }

    /// Bits of `t`, least significant first.
    pub fn blast(&mut self, t: &Term) -> Vec<Lit> {
        if let Some(b) = self.bits.get(&t.id()) {
            return b.clone();
        }
        // Iterative post-order.
        let mut stack = vec![(t.clone(), false)];
        while let Some((n, expanded)) = stack.pop() {
            if self.bits.contains_key(&n.id()) {
                continue;
            }
            if !expanded {
                stack.push((n.clone(), true));
                for c in n.children() {
                    if !self.bits.contains_key(&c.id()) {
                        stack.push((c.clone(), false));
                    }
                }
                continue;
            }
            let bits = self.node(&n);
            debug_assert_eq!(bits.len(), n.width() as usize);
            self.bits.insert(n.id(), bits);
        }
        self.bits[&t.id()].clone()
    }

    fn node(&mut self, n: &Term) -> Vec<Lit> {
        let w = n.width() as usize;
        let get = |s: &Self, t: &Term| s.bits[&t.id()].clone();
        match n.kind() {
            Kind::Const(c) => (0..w).map(|i| self.konst((c >> i) & 1 == 1)).collect(),
            Kind::Var(_) => {
                let v = n.as_var().unwrap();
                if let Some(b) = self.vars.get(&v) {
                    return b.clone();
                }
                let b: Vec<Lit> = (0..w).map(|_| self.fresh()).collect();
                self.vars.insert(v, b.clone());
                b
            }
            Kind::Not(a) => get(self, a).into_iter().map(negate).collect(),
            Kind::Zx(a) => {
                let mut b = get(self, a);
                b.resize(w, self.f());
                b
            }
            Kind::Sx(a) => {
                let mut b = get(self, a);
                let top = *b.last().unwrap();
                b.resize(w, top);
                b
            }
            Kind::Extract(a, lo) => get(self, a)[*lo as usize..*lo as usize + w].to_vec(),
            Kind::Ite(c, a, b) => {
                let c = get(self, c)[0];
                let (a, b) = (get(self, a), get(self, b));
                (0..w).map(|i| self.mux(c, a[i], b[i])).collect()
            }
            Kind::Bin(op, a, b) => {
                let (x, y) = (get(self, a), get(self, b));
                match op {
                    BinOp::And => (0..w).map(|i| self.and2(x[i], y[i])).collect(),
                    BinOp::Or => (0..w).map(|i| self.or2(x[i], y[i])).collect(),
                    BinOp::Xor => (0..w).map(|i| self.xor2(x[i], y[i])).collect(),
                    BinOp::Add => {
                        let f = self.f();
                        self.adder(&x, &y, f)
                    }
                    BinOp::Sub => {
                        let ny: Vec<Lit> = y.iter().map(|&l| negate(l)).collect();
                        let t = self.t;
                        self.adder(&x, &ny, t)
                    }
                    BinOp::Mul => self.mul(&x, &y),
                    BinOp::Shl | BinOp::Shrl | BinOp::Shra => self.shift(*op, &x, &y),
                    BinOp::Eq => vec![self.eq_bits(&x, &y)],
                    BinOp::Ult => vec![self.ult_bits(&x, &y)],
                    BinOp::Slt => {
                        let mut x = x;
                        let mut y = y;
                        let top = x.len() - 1;
                        x[top] = negate(x[top]);
                        y[top] = negate(y[top]);
                        vec![self.ult_bits(&x, &y)]
                    }
                }
            }
        }
    }

    pub fn is_true_lit(&self, l: Lit) -> bool {
        l == self.t
    }

    pub fn is_false_lit(&self, l: Lit) -> bool {
        l == self.f()
    }

    /// Reads a value from the solver's last model.
    pub fn read(&self, bits: &[Lit]) -> u32 {
        bits.iter().enumerate().fold(0u32, |acc, (i, &l)| {
            let v = self.sat.model_value(var_of(l) as u32) != (l & 1 == 1);
            acc | ((v as u32) << i)
        })
    }
}
