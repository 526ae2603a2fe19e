#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use duet::solver::all_assignments;
use duet::symexec::Harness;
use duet::term::{Assignment, BinOp, Evaluator, Term, Var};
use rand::Rng;

pub fn harness(config: serde_json::Value) -> Harness {
    Harness::from_json(&config.to_string(), Path::new(".")).expect("valid harness")
}

/// A harness comparing a program with itself.
pub fn single(asm: &str, extra: serde_json::Value) -> Harness {
    let mut cfg = serde_json::json!({"pre": {"asm": asm}, "post": {"asm": asm}});
    if let serde_json::Value::Object(m) = extra {
        for (k, v) in m {
            cfg[k] = v;
        }
    }
    harness(cfg)
}

pub fn samples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("samples")
}

/// Loads `samples/<rel>`.
pub fn sample(rel: &str) -> Harness {
    let path = samples_dir().join(rel);
    Harness::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Evaluates a conjunction under a total assignment.
pub fn holds_all(terms: &[Term], a: &Assignment) -> bool {
    let mut ev = Evaluator::new(a);
    terms.iter().all(|t| ev.holds(t).unwrap())
}

/// All assignments over `vars` satisfying every term.
pub fn models(terms: &[Term], vars: &[Var]) -> BTreeSet<Vec<u32>> {
    all_assignments(vars)
        .filter(|a| holds_all(terms, a))
        .map(|a| vars.iter().map(|v| a.get(&v.name).unwrap()).collect())
        .collect()
}

fn adapt(t: Term, w: u8) -> Term {
    use std::cmp::Ordering::*;
    match t.width().cmp(&w) {
        Equal => t,
        Less => t.zx(w).unwrap(),
        Greater => t.extract(0, w).unwrap(),
    }
}

/// A random expression of width `w` over `vars`.
pub fn random_expr(rng: &mut impl Rng, vars: &[Var], w: u8, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        if rng.gen_bool(0.35) {
            let max = if w >= 32 { u32::MAX } else { (1u32 << w) - 1 };
            return Term::constant(rng.gen_range(0..=max.min(300)), w);
        }
        let v = &vars[rng.gen_range(0..vars.len())];
        return adapt(Term::from_var(v), w);
    }
    const OPS: [BinOp; 9] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::And,
        BinOp::Or,
        BinOp::Xor,
        BinOp::Shl,
        BinOp::Shrl,
        BinOp::Shra,
    ];
    let op = OPS[rng.gen_range(0..OPS.len())];
    let a = random_expr(rng, vars, w, depth - 1);
    let b = random_expr(rng, vars, w, depth - 1);
    Term::bin(op, &a, &b).unwrap()
}

/// A random 1-bit predicate over `vars`.
pub fn random_pred(rng: &mut impl Rng, vars: &[Var], depth: u32) -> Term {
    if depth > 1 && rng.gen_bool(0.2) {
        let a = random_pred(rng, vars, depth - 1);
        let b = random_pred(rng, vars, depth - 1);
        return if rng.gen_bool(0.5) { a.and(&b) } else { a.or(&b) };
    }
    let w = [1u8, 8, 8][rng.gen_range(0..3)];
    let a = random_expr(rng, vars, w, depth);
    let b = random_expr(rng, vars, w, depth.saturating_sub(1));
    let op = [BinOp::Eq, BinOp::Ult, BinOp::Slt][rng.gen_range(0..3)];
    let p = Term::bin(op, &a, &b).unwrap();
    if rng.gen_bool(0.3) {
        p.not()
    } else {
        p
    }
}

/// Random loop-free assembly over inputs in `r1` and `r2`. Branches only
/// jump forward; `r7` stays zero and serves as the store base.
pub fn random_program(rng: &mut impl Rng, len: usize) -> Vec<String> {
    (0..len).map(|i| random_instruction(rng, i, len)).collect()
}

pub fn random_instruction(rng: &mut impl Rng, at: usize, len: usize) -> String {
    let reg = |rng: &mut dyn rand::RngCore| rng.gen_range(0..7);
    match rng.gen_range(0..10) {
        0 => format!("const r{}, {}", reg(rng), rng.gen_range(0..20)),
        1..=4 => {
            let ops = ["add", "sub", "mul", "and", "or", "xor", "shl", "shrl", "shra", "cmpeq", "cmplts", "cmpltu"];
            let op = ops[rng.gen_range(0..ops.len())];
            format!("{op} r{}, r{}, r{}", reg(rng), reg(rng), reg(rng))
        }
        5 => format!("addi r{}, r{}, {}", reg(rng), reg(rng), rng.gen_range(-5..6)),
        6 | 7 => {
            let op = if rng.gen_bool(0.5) { "beqz" } else { "bnez" };
            format!("{op} r{}, L{}", reg(rng), rng.gen_range(at + 1..=len))
        }
        8 => format!("store [r7+{}], r{}", 0x40 + rng.gen_range(0..4) * 2, reg(rng)),
        _ => format!("out 0, r{}", reg(rng)),
    }
}

pub fn render(program: &[String]) -> String {
    let mut out = String::new();
    for (i, ins) in program.iter().enumerate() {
        out.push_str(&format!("L{i}: {ins}\n"));
    }
    out.push_str(&format!("L{}: halt\n", program.len()));
    out
}

/// Like [`random_program`], but first spreads the inputs in `r1` and `r2`
/// over the other registers so that branches depend on them.
pub fn seeded_program(rng: &mut impl Rng, len: usize) -> Vec<String> {
    let mut p: Vec<String> = ["addi r3, r1, -7", "shl r4, r1, r2", "xor r5, r1, r2", "shrl r6, r1, r2", "addi r0, r1, -3"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let base = p.len();
    for i in 0..len {
        p.push(random_instruction(rng, base + i, base + len));
    }
    p
}
