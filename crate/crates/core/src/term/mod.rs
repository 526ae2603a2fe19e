//! Width-annotated bitvector terms.
//!
//! Terms are hash-consed: building the same structure twice yields the same
//! node, so syntactic equality is a pointer comparison and [`Term::id`] doubles
//! as a structural hash. Every constructor simplifies locally (constant
//! folding plus a handful of algebraic identities) before interning.
//!
//! Booleans are 1-bit vectors; `and`/`or`/`not` double as the logical
//! connectives at that width.

mod dsl;
mod eval;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock};

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dsl::{parse_expr, parse_pred, pretty, Env, InputsOnly};
pub use eval::{eval, Evaluator};

pub type Width = u8;

pub const WIDTHS: [Width; 4] = [1, 8, 16, 32];

pub fn valid_width(w: Width) -> bool {
    WIDTHS.contains(&w)
}

/// All-ones value of the given width.
pub fn mask(w: Width) -> u32 {
    if w >= 32 {
        u32::MAX
    } else {
        (1u32 << w) - 1
    }
}

fn sign_extend(v: u32, from: Width) -> u32 {
    if from >= 32 {
        v
    } else {
        let shift = 32 - from as u32;
        (((v << shift) as i32) >> shift) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("width mismatch in {op}: {left} vs {right}")]
    WidthMismatch {
        op: &'static str,
        left: Width,
        right: Width,
    },
    #[error("invalid width {0}")]
    BadWidth(u32),
    #[error("{0}")]
    Invalid(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdent(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    And,
    Or,
    Xor,
    Shl,
    Shrl,
    Shra,
    Eq,
    /// Signed less-than.
    Slt,
    /// Unsigned less-than.
    Ult,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Slt | BinOp::Ult)
    }

    pub fn is_commutative(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Mul | BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Eq
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            BinOp::Add => "add",
            BinOp::Sub => "sub",
            BinOp::Mul => "mul",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
            BinOp::Shl => "shl",
            BinOp::Shrl => "shrl",
            BinOp::Shra => "shra",
            BinOp::Eq => "eq",
            BinOp::Slt => "slt",
            BinOp::Ult => "ult",
        }
    }

    /// Concrete semantics on width-`w` operands (already masked).
    pub fn apply(self, a: u32, b: u32, w: Width) -> u32 {
        let m = mask(w);
        let r = match self {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Mul => a.wrapping_mul(b),
            BinOp::And => a & b,
            BinOp::Or => a | b,
            BinOp::Xor => a ^ b,
            BinOp::Shl => {
                if b >= w as u32 {
                    0
                } else {
                    a << b
                }
            }
            BinOp::Shrl => {
                if b >= w as u32 {
                    0
                } else {
                    a >> b
                }
            }
            BinOp::Shra => {
                let sa = sign_extend(a, w) as i32;
                (sa >> b.min(31)) as u32
            }
            BinOp::Eq => return (a == b) as u32,
            BinOp::Slt => return ((sign_extend(a, w) as i32) < (sign_extend(b, w) as i32)) as u32,
            BinOp::Ult => return (a < b) as u32,
        };
        r & m
    }
}

/// A named input variable of fixed width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var {
    pub name: Arc<str>,
    pub width: Width,
}

impl Var {
    pub fn new(name: impl Into<Arc<str>>, width: Width) -> Var {
        Var {
            name: name.into(),
            width,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.width)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Const(u32),
    Var(Arc<str>),
    Not(Term),
    Zx(Term),
    Sx(Term),
    /// Bits `[lo, lo + width)` of the operand.
    Extract(Term, u8),
    Bin(BinOp, Term, Term),
    Ite(Term, Term, Term),
}

pub struct Node {
    id: u64,
    width: Width,
    kind: Kind,
    /// Bits known to be zero in every evaluation.
    known_zero: u32,
}

/// A hash-consed term. Cloning is a reference-count bump.
#[derive(Clone)]
pub struct Term(Arc<Node>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.id.cmp(&other.0.id)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", pretty(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);
static TABLE: LazyLock<DashMap<(Kind, Width), Term>> = LazyLock::new(DashMap::new);

/// Number of distinct nodes interned so far in this process.
pub fn interned_count() -> usize {
    TABLE.len()
}

fn intern(kind: Kind, width: Width) -> Term {
    debug_assert!(valid_width(width));
    let key = (kind, width);
    if let Some(t) = TABLE.get(&key) {
        return t.clone();
    }
    // `entry` holds the shard lock, so racing inserts of one key agree.
    TABLE
        .entry(key.clone())
        .or_insert_with(|| {
            let known_zero = compute_known_zero(&key.0, width) & mask(width);
            Term(Arc::new(Node {
                id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
                width,
                kind: key.0,
                known_zero,
            }))
        })
        .clone()
}

fn compute_known_zero(kind: &Kind, w: Width) -> u32 {
    let m = mask(w);
    match kind {
        Kind::Const(c) => !c,
        Kind::Var(_) | Kind::Not(_) | Kind::Sx(_) => 0,
        Kind::Zx(a) => a.known_zero() | (m & !mask(a.width())),
        Kind::Extract(a, lo) => a.known_zero() >> lo,
        Kind::Ite(_, a, b) => a.known_zero() & b.known_zero(),
        Kind::Bin(op, a, b) => match op {
            BinOp::And => a.known_zero() | b.known_zero(),
            BinOp::Or => a.known_zero() & b.known_zero(),
            BinOp::Shl => match b.as_const() {
                Some(k) if k < w as u32 => (a.known_zero() << k) | mask(k as u8),
                Some(_) => m,
                None => 0,
            },
            BinOp::Shrl => match b.as_const() {
                Some(k) if k < w as u32 => (a.known_zero() >> k) | (m & !(m >> k)),
                Some(_) => m,
                None => 0,
            },
            _ => 0,
        },
    }
}

fn check_width(w: u32) -> Result<Width, TermError> {
    if WIDTHS.contains(&(w as u8)) && w <= 32 {
        Ok(w as Width)
    } else {
        Err(TermError::BadWidth(w))
    }
}

impl Term {
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn width(&self) -> Width {
        self.0.width
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn known_zero(&self) -> u32 {
        self.0.known_zero
    }

    pub fn as_const(&self) -> Option<u32> {
        match self.kind() {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        self.as_const().is_some()
    }

    pub fn is_true(&self) -> bool {
        self.width() == 1 && self.as_const() == Some(1)
    }

    pub fn is_false(&self) -> bool {
        self.width() == 1 && self.as_const() == Some(0)
    }

    pub fn as_var(&self) -> Option<Var> {
        match self.kind() {
            Kind::Var(name) => Some(Var {
                name: name.clone(),
                width: self.width(),
            }),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self.kind() {
            Kind::Const(_) | Kind::Var(_) => vec![],
            Kind::Not(a) | Kind::Zx(a) | Kind::Sx(a) | Kind::Extract(a, _) => vec![a],
            Kind::Bin(_, a, b) => vec![a, b],
            Kind::Ite(c, a, b) => vec![c, a, b],
        }
    }

    // ---- leaves ---------------------------------------------------------

    pub fn constant(value: u32, width: Width) -> Term {
        assert!(valid_width(width), "invalid width {width}");
        intern(Kind::Const(value & mask(width)), width)
    }

    pub fn bool(b: bool) -> Term {
        Term::constant(b as u32, 1)
    }

    pub fn tt() -> Term {
        Term::bool(true)
    }

    pub fn ff() -> Term {
        Term::bool(false)
    }

    pub fn var(name: &str, width: Width) -> Term {
        assert!(valid_width(width), "invalid width {width}");
        intern(Kind::Var(Arc::from(name)), width)
    }

    pub fn from_var(v: &Var) -> Term {
        assert!(valid_width(v.width), "invalid width {}", v.width);
        intern(Kind::Var(v.name.clone()), v.width)
    }

    /// Interns a node exactly as given, skipping simplification. Only useful
    /// for checking the simplifier against unsimplified forms.
    pub fn raw(kind: Kind, width: Width) -> Term {
        intern(kind, width)
    }

    // ---- unary ----------------------------------------------------------

    pub fn not(&self) -> Term {
        let w = self.width();
        match self.kind() {
            Kind::Const(c) => Term::constant(!c, w),
            Kind::Not(a) => a.clone(),
            _ => intern(Kind::Not(self.clone()), w),
        }
    }

    pub fn zx(&self, to: Width) -> Result<Term, TermError> {
        let to = check_width(to as u32)?;
        let w = self.width();
        if to < w {
            return Err(TermError::Invalid(format!("zx from {w} to narrower {to}")));
        }
        Ok(match self.kind() {
            _ if to == w => self.clone(),
            Kind::Const(c) => Term::constant(*c, to),
            Kind::Zx(a) => intern(Kind::Zx(a.clone()), to),
            _ => intern(Kind::Zx(self.clone()), to),
        })
    }

    pub fn sx(&self, to: Width) -> Result<Term, TermError> {
        let to = check_width(to as u32)?;
        let w = self.width();
        if to < w {
            return Err(TermError::Invalid(format!("sx from {w} to narrower {to}")));
        }
        Ok(match self.kind() {
            _ if to == w => self.clone(),
            Kind::Const(c) => Term::constant(sign_extend(*c, w), to),
            Kind::Sx(a) => intern(Kind::Sx(a.clone()), to),
            Kind::Zx(a) => intern(Kind::Zx(a.clone()), to),
            _ => intern(Kind::Sx(self.clone()), to),
        })
    }

    /// Bits `[lo, lo + width)`.
    pub fn extract(&self, lo: u8, width: Width) -> Result<Term, TermError> {
        let width = check_width(width as u32)?;
        let w = self.width();
        if lo as u32 + width as u32 > w as u32 {
            return Err(TermError::Invalid(format!(
                "extract [{lo}, {}) out of {w}-bit operand",
                lo as u32 + width as u32
            )));
        }
        Ok(self.extract_unchecked(lo, width))
    }

    fn extract_unchecked(&self, lo: u8, width: Width) -> Term {
        let w = self.width();
        if lo == 0 && width == w {
            return self.clone();
        }
        if (self.known_zero() >> lo) & mask(width) == mask(width) {
            return Term::constant(0, width);
        }
        let hi = lo as u32 + width as u32;
        match self.kind() {
            Kind::Const(c) => Term::constant(c >> lo, width),
            Kind::Extract(a, lo2) => a.extract_unchecked(lo + lo2, width),
            Kind::Zx(a) if hi <= a.width() as u32 => a.extract_unchecked(lo, width),
            Kind::Sx(a) if hi <= a.width() as u32 => a.extract_unchecked(lo, width),
            Kind::Not(a) => a.extract_unchecked(lo, width).not(),
            Kind::Bin(op @ (BinOp::And | BinOp::Or | BinOp::Xor), a, b) => {
                let (ea, eb) = (a.extract_unchecked(lo, width), b.extract_unchecked(lo, width));
                mk_bin(*op, &ea, &eb)
            }
            Kind::Bin(BinOp::Shl, a, b) => match b.as_const() {
                Some(k) if k <= lo as u32 => a.extract_unchecked(lo - k as u8, width),
                _ => intern(Kind::Extract(self.clone(), lo), width),
            },
            Kind::Bin(BinOp::Shrl, a, b) => match b.as_const() {
                Some(k) if hi + k <= w as u32 => a.extract_unchecked(lo + k as u8, width),
                _ => intern(Kind::Extract(self.clone(), lo), width),
            },
            // Low bits of add/sub/mul depend only on low bits of the operands.
            Kind::Bin(op @ (BinOp::Add | BinOp::Sub | BinOp::Mul), a, b) if lo == 0 => {
                let (ea, eb) = (a.extract_unchecked(0, width), b.extract_unchecked(0, width));
                mk_bin(*op, &ea, &eb)
            }
            Kind::Ite(c, a, b) => {
                let (ea, eb) = (a.extract_unchecked(lo, width), b.extract_unchecked(lo, width));
                Term::ite_unchecked(c, &ea, &eb)
            }
            _ => intern(Kind::Extract(self.clone(), lo), width),
        }
    }

    // ---- binary ---------------------------------------------------------

    pub fn bin(op: BinOp, a: &Term, b: &Term) -> Result<Term, TermError> {
        if a.width() != b.width() {
            return Err(TermError::WidthMismatch {
                op: op.name(),
                left: a.width(),
                right: b.width(),
            });
        }
        Ok(mk_bin(op, a, b))
    }

    pub fn ite(c: &Term, a: &Term, b: &Term) -> Result<Term, TermError> {
        if c.width() != 1 {
            return Err(TermError::Invalid(format!(
                "ite condition must be 1 bit, got {}",
                c.width()
            )));
        }
        if a.width() != b.width() {
            return Err(TermError::WidthMismatch {
                op: "ite",
                left: a.width(),
                right: b.width(),
            });
        }
        Ok(Term::ite_unchecked(c, a, b))
    }

    fn ite_unchecked(c: &Term, a: &Term, b: &Term) -> Term {
        if let Some(cv) = c.as_const() {
            return if cv == 1 { a.clone() } else { b.clone() };
        }
        if a == b {
            return a.clone();
        }
        if a.width() == 1 {
            match (a.as_const(), b.as_const()) {
                (Some(1), Some(0)) => return c.clone(),
                (Some(0), Some(1)) => return c.not(),
                _ => {}
            }
        }
        if let Kind::Not(inner) = c.kind() {
            return Term::ite_unchecked(inner, b, a);
        }
        intern(Kind::Ite(c.clone(), a.clone(), b.clone()), a.width())
    }

    // Infallible shorthands for internal callers with width-correct operands.

    fn op(&self, op: BinOp, rhs: &Term) -> Term {
        Term::bin(op, self, rhs).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn add(&self, rhs: &Term) -> Term {
        self.op(BinOp::Add, rhs)
    }
    pub fn sub(&self, rhs: &Term) -> Term {
        self.op(BinOp::Sub, rhs)
    }
    pub fn mul(&self, rhs: &Term) -> Term {
        self.op(BinOp::Mul, rhs)
    }
    pub fn and(&self, rhs: &Term) -> Term {
        self.op(BinOp::And, rhs)
    }
    pub fn or(&self, rhs: &Term) -> Term {
        self.op(BinOp::Or, rhs)
    }
    pub fn xor(&self, rhs: &Term) -> Term {
        self.op(BinOp::Xor, rhs)
    }
    pub fn shl(&self, rhs: &Term) -> Term {
        self.op(BinOp::Shl, rhs)
    }
    pub fn shrl(&self, rhs: &Term) -> Term {
        self.op(BinOp::Shrl, rhs)
    }
    pub fn shra(&self, rhs: &Term) -> Term {
        self.op(BinOp::Shra, rhs)
    }
    pub fn eq_(&self, rhs: &Term) -> Term {
        self.op(BinOp::Eq, rhs)
    }
    pub fn ne_(&self, rhs: &Term) -> Term {
        self.op(BinOp::Eq, rhs).not()
    }
    pub fn slt(&self, rhs: &Term) -> Term {
        self.op(BinOp::Slt, rhs)
    }
    pub fn ult(&self, rhs: &Term) -> Term {
        self.op(BinOp::Ult, rhs)
    }

    /// Conjunction of 1-bit terms; `true` when empty.
    pub fn all<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Term {
        terms.into_iter().fold(Term::tt(), |acc, t| acc.and(t))
    }

    /// Disjunction of 1-bit terms; `false` when empty.
    pub fn any<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Term {
        terms.into_iter().fold(Term::ff(), |acc, t| acc.or(t))
    }

    // ---- traversal ------------------------------------------------------

    /// Free variables.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.id()) {
                continue;
            }
            if let Some(v) = t.as_var() {
                out.insert(v);
            }
            stack.extend(t.children());
        }
        out
    }

    /// Number of distinct nodes reachable from this term.
    pub fn dag_size(&self) -> usize {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if seen.insert(t.id()) {
                stack.extend(t.children());
            }
        }
        seen.len()
    }

    /// Replaces bound variables by constants and re-simplifies.
    pub fn substitute(&self, partial: &Assignment) -> Term {
        let mut memo = HashMap::new();
        self.subst_rec(partial, &mut memo)
    }

    fn subst_rec(&self, a: &Assignment, memo: &mut HashMap<u64, Term>) -> Term {
        if let Some(t) = memo.get(&self.id()) {
            return t.clone();
        }
        let out = match self.kind() {
            Kind::Const(_) => self.clone(),
            Kind::Var(name) => match a.get(name) {
                Some(v) => Term::constant(v, self.width()),
                None => self.clone(),
            },
            Kind::Not(x) => x.subst_rec(a, memo).not(),
            Kind::Zx(x) => x.subst_rec(a, memo).zx(self.width()).unwrap(),
            Kind::Sx(x) => x.subst_rec(a, memo).sx(self.width()).unwrap(),
            Kind::Extract(x, lo) => x.subst_rec(a, memo).extract_unchecked(*lo, self.width()),
            Kind::Bin(op, x, y) => {
                let (x, y) = (x.subst_rec(a, memo), y.subst_rec(a, memo));
                mk_bin(*op, &x, &y)
            }
            Kind::Ite(c, x, y) => {
                let (c, x, y) = (c.subst_rec(a, memo), x.subst_rec(a, memo), y.subst_rec(a, memo));
                Term::ite_unchecked(&c, &x, &y)
            }
        };
        memo.insert(self.id(), out.clone());
        out
    }
}

/// Little-endian composition of four byte terms into a 32-bit word.
pub fn word_from_bytes(bytes: [&Term; 4]) -> Term {
    let mut acc = Term::constant(0, 32);
    for (i, b) in bytes.iter().enumerate() {
        debug_assert_eq!(b.width(), 8);
        let part = b.zx(32).unwrap().shl(&Term::constant(8 * i as u32, 32));
        acc = acc.or(&part);
    }
    acc
}

/// Byte `i` (little-endian) of a 32-bit word.
pub fn byte_of(word: &Term, i: u8) -> Term {
    word.extract(8 * i, 8).expect("byte index in range")
}

fn is_ones(t: &Term) -> bool {
    t.as_const() == Some(mask(t.width()))
}

fn is_zero(t: &Term) -> bool {
    t.as_const() == Some(0)
}

/// Simplifying constructor for binary nodes. Operand widths must match.
fn mk_bin(op: BinOp, a: &Term, b: &Term) -> Term {
    let w = a.width();
    debug_assert_eq!(w, b.width());
    let out_w = if op.is_comparison() { 1 } else { w };
    let zero = || Term::constant(0, w);

    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return Term::constant(op.apply(x, y, w), out_w);
    }
    // Constants go on the right of commutative operators.
    if op.is_commutative() && a.is_const() {
        return mk_bin(op, b, a);
    }
    let same = a == b;
    let bc = b.as_const();

    match op {
        BinOp::Add => {
            if is_zero(b) {
                return a.clone();
            }
            if let (Kind::Bin(BinOp::Add, x, c1), Some(c2)) = (a.kind(), bc) {
                if let Some(c1) = c1.as_const() {
                    return mk_bin(BinOp::Add, x, &Term::constant(c1.wrapping_add(c2), w));
                }
            }
        }
        BinOp::Sub => {
            if same {
                return zero();
            }
            if let Some(c) = bc {
                return mk_bin(BinOp::Add, a, &Term::constant(c.wrapping_neg(), w));
            }
        }
        BinOp::Mul => {
            if is_zero(b) {
                return zero();
            }
            if bc == Some(1) {
                return a.clone();
            }
        }
        BinOp::And => {
            if same || is_ones(b) {
                return a.clone();
            }
            if is_zero(b) {
                return zero();
            }
            if let Some(c) = bc {
                let maybe_one = !a.known_zero() & mask(w);
                if c & maybe_one == 0 {
                    return zero();
                }
                if maybe_one & !c == 0 {
                    return a.clone();
                }
                if let Kind::Bin(BinOp::Or, x, y) = a.kind() {
                    let (x, y) = (mk_bin(BinOp::And, x, b), mk_bin(BinOp::And, y, b));
                    return mk_bin(BinOp::Or, &x, &y);
                }
            }
            if w == 1 && (matches!(a.kind(), Kind::Not(n) if n == b) || matches!(b.kind(), Kind::Not(n) if n == a)) {
                return zero();
            }
        }
        BinOp::Or => {
            if same || is_zero(b) {
                return a.clone();
            }
            if is_ones(b) {
                return b.clone();
            }
            if w == 1 && (matches!(a.kind(), Kind::Not(n) if n == b) || matches!(b.kind(), Kind::Not(n) if n == a)) {
                return Term::constant(1, 1);
            }
        }
        BinOp::Xor => {
            if same {
                return zero();
            }
            if is_zero(b) {
                return a.clone();
            }
            if is_ones(b) {
                return a.not();
            }
        }
        BinOp::Shl | BinOp::Shrl | BinOp::Shra => {
            if is_zero(b) {
                return a.clone();
            }
            if is_zero(a) {
                return zero();
            }
            if op != BinOp::Shra && bc.is_some_and(|k| k >= w as u32) {
                return zero();
            }
        }
        BinOp::Eq => {
            if same {
                return Term::tt();
            }
            if let Some(c) = bc {
                if w == 1 {
                    return if c == 1 { a.clone() } else { a.not() };
                }
                // Bits known zero on the left must be zero in the constant.
                if c & a.known_zero() != 0 {
                    return Term::ff();
                }
                match a.kind() {
                    Kind::Zx(x) => {
                        return mk_bin(BinOp::Eq, x, &Term::constant(c, x.width()));
                    }
                    Kind::Bin(BinOp::Add, x, k) if k.is_const() => {
                        let k = k.as_const().unwrap();
                        return mk_bin(BinOp::Eq, x, &Term::constant(c.wrapping_sub(k), w));
                    }
                    Kind::Bin(BinOp::Xor, x, k) if k.is_const() => {
                        let k = k.as_const().unwrap();
                        return mk_bin(BinOp::Eq, x, &Term::constant(c ^ k, w));
                    }
                    Kind::Not(x) => {
                        return mk_bin(BinOp::Eq, x, &Term::constant(!c, w));
                    }
                    _ => {}
                }
            }
            if let (Kind::Zx(x), Kind::Zx(y)) = (a.kind(), b.kind()) {
                if x.width() == y.width() {
                    return mk_bin(BinOp::Eq, x, y);
                }
            }
        }
        BinOp::Slt | BinOp::Ult => {
            if same {
                return Term::ff();
            }
            if op == BinOp::Ult && is_zero(b) {
                return Term::ff();
            }
            if op == BinOp::Ult {
                if let (Kind::Zx(x), Kind::Zx(y)) = (a.kind(), b.kind()) {
                    if x.width() == y.width() {
                        return mk_bin(BinOp::Ult, x, y);
                    }
                }
            }
        }
    }
    intern(Kind::Bin(op, a.clone(), b.clone()), out_w)
}

/// A concrete value per variable name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<String, u32>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.0.get(name).copied()
    }

    pub fn insert(&mut self, var: &Var, value: u32) {
        self.0.insert(var.name.to_string(), value & mask(var.width));
    }

    pub fn insert_raw(&mut self, name: &str, value: u32) {
        self.0.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, value: u32) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Restriction to the given variables, filling missing ones with zero.
    pub fn completed(&self, vars: &BTreeSet<Var>) -> Assignment {
        let mut out = Assignment::new();
        for v in vars {
            out.insert(v, self.get(&v.name).unwrap_or(0));
        }
        out
    }

    /// Union with `other`; entries already present win.
    pub fn merged(&self, other: &Assignment) -> Assignment {
        let mut out = other.clone();
        for (k, v) in &self.0 {
            out.0.insert(k.clone(), *v);
        }
        out
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}=0x{v:x}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl FromIterator<(String, u32)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (String, u32)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: u32) -> Term {
        Term::constant(v, 32)
    }

    #[test]
    fn folding_and_identities() {
        assert_eq!(c(2).add(&c(3)), c(5));
        let v = Term::var("v", 32);
        assert_eq!(v.xor(&v), c(0));
        assert_eq!(c(1).eq_(&c(2)), Term::constant(0, 1));
        assert_eq!(v.eq_(&v), Term::tt());
        assert_eq!(v.add(&c(0)), v);
        assert_eq!(v.and(&c(0)), c(0));
    }

    #[test]
    fn hash_consing_is_structural() {
        let x = Term::var("hc_x", 8);
        let a = x.zx(32).unwrap().add(&Term::var("hc_y", 32));
        let b = Term::var("hc_x", 8).zx(32).unwrap().add(&Term::var("hc_y", 32));
        assert_eq!(a, b);
        assert_eq!(a.id(), b.id());
        let before = interned_count();
        let _ = Term::var("hc_x", 8).zx(32).unwrap().add(&Term::var("hc_y", 32));
        assert_eq!(interned_count(), before);
    }

    #[test]
    fn width_errors() {
        let a = Term::var("w8", 8);
        let b = Term::var("w32", 32);
        assert!(matches!(
            Term::bin(BinOp::Add, &a, &b),
            Err(TermError::WidthMismatch { .. })
        ));
        assert!(a.zx(12).is_err());
        assert!(b.zx(8).is_err());
        assert!(a.extract(4, 8).is_err());
        assert!(Term::ite(&a, &b, &b).is_err());
    }

    #[test]
    fn byte_lanes_recombine() {
        let bytes: Vec<Term> = (0..4).map(|i| Term::var(&format!("lane{i}"), 8)).collect();
        let word = word_from_bytes([&bytes[0], &bytes[1], &bytes[2], &bytes[3]]);
        for (i, b) in bytes.iter().enumerate() {
            assert_eq!(&byte_of(&word, i as u8), b);
        }
        assert_eq!(word.and(&c(0xff)), bytes[0].zx(32).unwrap());
    }

    #[test]
    fn substitution() {
        let x = Term::var("sx", 32);
        let y = Term::var("sy", 32);
        let t = x.eq_(&c(1)).and(&y.eq_(&c(2)));
        let a = Assignment::new().with("sx", 1);
        assert_eq!(t.substitute(&a), y.eq_(&c(2)));
        let a = Assignment::new().with("sx", 0);
        assert_eq!(x.eq_(&c(1)).substitute(&a), Term::ff());
    }

    #[test]
    fn eq_through_zero_extension() {
        let x = Term::var("ez", 8);
        assert_eq!(x.zx(32).unwrap().eq_(&c(300)), Term::ff());
        assert_eq!(x.zx(32).unwrap().eq_(&c(7)), x.eq_(&Term::constant(7, 8)));
    }

    #[test]
    fn vars_collects_free_variables() {
        let t = Term::var("va", 8).zx(32).unwrap().add(&Term::var("vb", 32));
        let names: Vec<String> = t.vars().iter().map(|v| v.name.to_string()).collect();
        assert_eq!(names, vec!["va", "vb"]);
    }
}
