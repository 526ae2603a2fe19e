use std::collections::HashSet;
use std::fmt::Write;

use super::Query;
use crate::term::{BinOp, Kind, Term};

fn bv(v: u32, w: u8) -> String {
    format!("(_ bv{v} {w})")
}

fn name(t: &Term) -> String {
    match t.kind() {
        Kind::Const(c) => bv(*c, t.width()),
        Kind::Var(n) => format!("|{n}|"),
        _ => format!("t{}", t.id()),
    }
}

fn bool_to_bv(e: String) -> String {
    format!("(ite {e} #b1 #b0)")
}

fn define(t: &Term) -> String {
    let w = t.width();
    match t.kind() {
        Kind::Const(_) | Kind::Var(_) => unreachable!(),
        Kind::Not(a) => format!("(bvnot {})", name(a)),
        Kind::Zx(a) => format!("((_ zero_extend {}) {})", w - a.width(), name(a)),
        Kind::Sx(a) => format!("((_ sign_extend {}) {})", w - a.width(), name(a)),
        Kind::Extract(a, lo) => format!("((_ extract {} {lo}) {})", lo + w - 1, name(a)),
        Kind::Ite(c, a, b) => format!("(ite (= {} #b1) {} {})", name(c), name(a), name(b)),
        Kind::Bin(op, a, b) => {
            let (a, b) = (name(a), name(b));
            match op {
                BinOp::Eq => bool_to_bv(format!("(= {a} {b})")),
                BinOp::Slt => bool_to_bv(format!("(bvslt {a} {b})")),
                BinOp::Ult => bool_to_bv(format!("(bvult {a} {b})")),
                _ => {
                    let f = match op {
                        BinOp::Add => "bvadd",
                        BinOp::Sub => "bvsub",
                        BinOp::Mul => "bvmul",
                        BinOp::And => "bvand",
                        BinOp::Or => "bvor",
                        BinOp::Xor => "bvxor",
                        BinOp::Shl => "bvshl",
                        BinOp::Shrl => "bvlshr",
                        _ => "bvashr",
                    };
                    format!("({f} {a} {b})")
                }
            }
        }
    }
}

/// QF_BV rendering for cross-checking with external solvers. Shared
/// subterms become `define-fun`s.
pub fn to_smtlib(q: &Query) -> String {
    let mut out = String::from("(set-logic QF_BV)\n");
    for v in &q.vars {
        let _ = writeln!(out, "(declare-fun |{}| () (_ BitVec {}))", v.name, v.width);
    }
    let mut done = HashSet::new();
    for c in &q.clauses {
        let mut stack = vec![(c.clone(), false)];
        while let Some((t, expanded)) = stack.pop() {
            if matches!(t.kind(), Kind::Const(_) | Kind::Var(_)) || done.contains(&t.id()) {
                continue;
            }
            if expanded {
                done.insert(t.id());
                let _ = writeln!(
                    out,
                    "(define-fun {} () (_ BitVec {}) {})",
                    name(&t),
                    t.width(),
                    define(&t)
                );
            } else {
                stack.push((t.clone(), true));
                for ch in t.children() {
                    stack.push((ch.clone(), false));
                }
            }
        }
    }
    for c in &q.clauses {
        let _ = writeln!(out, "(assert (= {} #b1))", name(c));
    }
    out.push_str("(check-sat)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_declarations_and_asserts() {
        let x = Term::var("x", 8);
        let q = Query::new(vec![x.add(&Term::constant(1, 8)).ult(&Term::constant(5, 8))]);
        let s = to_smtlib(&q);
        assert!(s.contains("(declare-fun |x| () (_ BitVec 8))"));
        assert!(s.contains("bvadd |x| (_ bv1 8)"));
        assert!(s.contains("bvult"));
        assert!(s.trim_end().ends_with("(check-sat)"));
    }
}
