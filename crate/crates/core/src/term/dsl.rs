//! The predicate language used in harness files, and a printer whose output
//! parses back to an equivalent term.
//!
//! ```text
//! expr   := or
//! or     := and ("||" and)*
//! and    := not ("&&" not)*
//! not    := "!" not | cmp
//! cmp    := sum (CMPOP sum)?
//! sum    := term (("+" | "-" | "|" | "^") term)*
//! term   := factor (("*" | "&" | "<<" | ">>u" | ">>s") factor)*
//! factor := REG | "m8[" expr "]" | "m32[" expr "]" | IDENT | LIT
//!         | "zx(" expr "," W ")" | "sx(" expr "," W ")"
//!         | "extract(" expr "," LO "," W ")" | "ite(" expr "," expr "," expr ")"
//!         | "(" expr ")"
//! ```
//!
//! Literals are decimal, `0x` hex or a quoted character and take the width of
//! the operand they meet. Anything else mixing widths needs `zx`/`sx`.

use std::collections::BTreeMap;

use super::{mask, word_from_bytes, BinOp, Kind, Term, TermError, Var, Width};

/// Name resolution for predicates.
pub trait Env {
    fn register(&self, _index: usize) -> Option<Term> {
        None
    }
    fn mem8(&self, _addr: u32) -> Option<Term> {
        None
    }
    fn input(&self, name: &str) -> Option<Term>;
}

/// Resolves only declared input variables.
#[derive(Clone, Debug, Default)]
pub struct InputsOnly(BTreeMap<String, Width>);

impl InputsOnly {
    pub fn new<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Self {
        InputsOnly(vars.into_iter().map(|v| (v.name.to_string(), v.width)).collect())
    }
}

impl Env for InputsOnly {
    fn input(&self, name: &str) -> Option<Term> {
        self.0.get(name).map(|&w| Term::var(name, w))
    }
}

// ---- lexer ---------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Op(&'static str),
}

const OPS: [&str; 24] = [
    ">>u", ">>s", "<=s", "<=u", ">=s", ">=u", "||", "&&", "==", "!=", "<<", "<s", "<u", ">s",
    ">u", "!", "+", "-", "|", "^", "*", "&", "<", ">",
];

fn perr<T>(pos: usize, msg: impl Into<String>) -> Result<T, TermError> {
    Err(TermError::Parse {
        pos,
        msg: msg.into(),
    })
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, TermError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBrack,
            b']' => Tok::RBrack,
            b',' => Tok::Comma,
            b'\'' => {
                if i + 2 < bytes.len() && bytes[i + 2] == b'\'' {
                    i += 3;
                    out.push((Tok::Num(bytes[i - 2] as u64), start));
                    continue;
                }
                return perr(start, "malformed character literal");
            }
            b'0'..=b'9' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let text = &src[i..j];
                let parsed = if let Some(h) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
                    u64::from_str_radix(h, 16)
                } else {
                    text.parse::<u64>()
                };
                let v = match parsed {
                    Ok(v) => v,
                    Err(_) => return perr(start, format!("bad number `{text}`")),
                };
                i = j;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push((Tok::Ident(src[i..j].to_string()), start));
                i = j;
                continue;
            }
            _ => {
                let rest = &src[i..];
                match OPS.iter().find(|op| rest.starts_with(**op)) {
                    Some(&"<") | Some(&">") => {
                        return perr(start, "comparison needs an `s` or `u` suffix")
                    }
                    Some(op) => {
                        i += op.len();
                        out.push((Tok::Op(op), start));
                        continue;
                    }
                    None => {
                        let ch = rest.chars().next().unwrap();
                        return perr(start, format!("unexpected character `{ch}`"));
                    }
                }
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

// ---- parser --------------------------------------------------------------

#[derive(Clone, Debug)]
enum Ast {
    Lit(u64, usize),
    Reg(usize),
    Mem { wide: bool, addr: Box<Ast>, pos: usize },
    Ident(String),
    Ext { signed: bool, e: Box<Ast>, width: u64, pos: usize },
    Extract { e: Box<Ast>, lo: u64, width: u64, pos: usize },
    Ite(Box<Ast>, Box<Ast>, Box<Ast>, usize),
    Not(Box<Ast>, usize),
    Logic { or: bool, l: Box<Ast>, r: Box<Ast>, pos: usize },
    Cmp { op: &'static str, l: Box<Ast>, r: Box<Ast>, pos: usize },
    Arith { op: BinOp, l: Box<Ast>, r: Box<Ast>, pos: usize },
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn unexpected<T>(&self) -> Result<T, TermError> {
        match self.peek() {
            None => perr(self.end, "unexpected end of input"),
            Some(t) => perr(self.pos(), format!("unexpected token {}", show(t))),
        }
    }

    fn expect(&mut self, want: &Tok) -> Result<(), TermError> {
        if self.peek() == Some(want) {
            self.at += 1;
            Ok(())
        } else {
            match self.peek() {
                None => perr(self.end, format!("expected {} but input ended", show(want))),
                Some(t) => perr(self.pos(), format!("expected {}, found {}", show(want), show(t))),
            }
        }
    }

    fn eat_op(&mut self, ops: &[&'static str]) -> Option<(&'static str, usize)> {
        match self.peek() {
            Some(Tok::Op(op)) if ops.contains(op) => {
                let (op, pos) = (*op, self.pos());
                self.at += 1;
                Some((op, pos))
            }
            _ => None,
        }
    }

    fn number(&mut self) -> Result<u64, TermError> {
        match self.bump() {
            Some(Tok::Num(n)) => Ok(n),
            _ => {
                self.at -= 1;
                self.unexpected()
            }
        }
    }

    fn expr(&mut self) -> Result<Ast, TermError> {
        let mut l = self.and()?;
        while let Some((_, pos)) = self.eat_op(&["||"]) {
            let r = self.and()?;
            l = Ast::Logic { or: true, l: l.into(), r: r.into(), pos };
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Ast, TermError> {
        let mut l = self.not()?;
        while let Some((_, pos)) = self.eat_op(&["&&"]) {
            let r = self.not()?;
            l = Ast::Logic { or: false, l: l.into(), r: r.into(), pos };
        }
        Ok(l)
    }

    fn not(&mut self) -> Result<Ast, TermError> {
        if let Some((_, pos)) = self.eat_op(&["!"]) {
            return Ok(Ast::Not(self.not()?.into(), pos));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Ast, TermError> {
        let l = self.sum()?;
        const CMP: [&str; 10] = ["==", "!=", "<s", "<=s", ">s", ">=s", "<u", "<=u", ">u", ">=u"];
        if let Some((op, pos)) = self.eat_op(&CMP) {
            let r = self.sum()?;
            return Ok(Ast::Cmp { op, l: l.into(), r: r.into(), pos });
        }
        Ok(l)
    }

    fn sum(&mut self) -> Result<Ast, TermError> {
        let mut l = self.term()?;
        while let Some((op, pos)) = self.eat_op(&["+", "-", "|", "^"]) {
            let r = self.term()?;
            let op = match op {
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "|" => BinOp::Or,
                _ => BinOp::Xor,
            };
            l = Ast::Arith { op, l: l.into(), r: r.into(), pos };
        }
        Ok(l)
    }

    fn term(&mut self) -> Result<Ast, TermError> {
        let mut l = self.factor()?;
        while let Some((op, pos)) = self.eat_op(&["*", "&", "<<", ">>u", ">>s"]) {
            let r = self.factor()?;
            let op = match op {
                "*" => BinOp::Mul,
                "&" => BinOp::And,
                "<<" => BinOp::Shl,
                ">>u" => BinOp::Shrl,
                _ => BinOp::Shra,
            };
            l = Ast::Arith { op, l: l.into(), r: r.into(), pos };
        }
        Ok(l)
    }

    fn factor(&mut self) -> Result<Ast, TermError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(Ast::Lit(n, pos)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.ident(name, pos),
            _ => {
                self.at -= 1;
                self.unexpected()
            }
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Ast, TermError> {
        if let Some(d) = name.strip_prefix('r') {
            if d.len() == 1 && matches!(d.as_bytes()[0], b'0'..=b'7') {
                return Ok(Ast::Reg((d.as_bytes()[0] - b'0') as usize));
            }
        }
        match name.as_str() {
            "m8" | "m32" => {
                self.expect(&Tok::LBrack)?;
                let addr = self.expr()?;
                self.expect(&Tok::RBrack)?;
                Ok(Ast::Mem { wide: name == "m32", addr: addr.into(), pos })
            }
            "zx" | "sx" => {
                self.expect(&Tok::LParen)?;
                let e = self.expr()?;
                self.expect(&Tok::Comma)?;
                let width = self.number()?;
                self.expect(&Tok::RParen)?;
                Ok(Ast::Ext { signed: name == "sx", e: e.into(), width, pos })
            }
            "extract" => {
                self.expect(&Tok::LParen)?;
                let e = self.expr()?;
                self.expect(&Tok::Comma)?;
                let lo = self.number()?;
                self.expect(&Tok::Comma)?;
                let width = self.number()?;
                self.expect(&Tok::RParen)?;
                Ok(Ast::Extract { e: e.into(), lo, width, pos })
            }
            "ite" => {
                self.expect(&Tok::LParen)?;
                let c = self.expr()?;
                self.expect(&Tok::Comma)?;
                let a = self.expr()?;
                self.expect(&Tok::Comma)?;
                let b = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(Ast::Ite(c.into(), a.into(), b.into(), pos))
            }
            _ => Ok(Ast::Ident(name)),
        }
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrack => "`[`".into(),
        Tok::RBrack => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Op(op) => format!("`{op}`"),
    }
}

fn parse(src: &str) -> Result<Ast, TermError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
        end: src.len(),
    };
    let ast = p.expr()?;
    if p.peek().is_some() {
        return p.unexpected();
    }
    Ok(ast)
}

// ---- elaboration ---------------------------------------------------------

/// A width-checked term, or a literal-only subexpression still waiting for
/// a width from its context.
enum Typed<'a> {
    Term(Term),
    Poly(&'a Ast),
}

fn wrap(e: TermError, pos: usize) -> TermError {
    match e {
        TermError::Parse { .. } | TermError::UnknownIdent(_) => e,
        other => TermError::Parse {
            pos,
            msg: other.to_string(),
        },
    }
}

struct Elab<'e> {
    env: &'e dyn Env,
}

impl Elab<'_> {
    fn at(&self, ast: &Ast, w: Width) -> Result<Term, TermError> {
        match self.elab(ast, Some(w))? {
            Typed::Term(t) => Ok(t),
            Typed::Poly(_) => unreachable!("width was supplied"),
        }
    }

    fn term(&self, ast: &Ast, pos: usize, what: &str) -> Result<Term, TermError> {
        match self.elab(ast, None)? {
            Typed::Term(t) => Ok(t),
            Typed::Poly(_) => perr(pos, format!("cannot infer the width of a literal in {what}")),
        }
    }

    fn pair<'a>(
        &self,
        l: &'a Ast,
        r: &'a Ast,
        want: Option<Width>,
    ) -> Result<Option<(Term, Term)>, TermError> {
        let a = self.elab(l, want)?;
        let b = self.elab(r, want)?;
        Ok(match (a, b) {
            (Typed::Term(a), Typed::Term(b)) => Some((a, b)),
            (Typed::Term(a), Typed::Poly(r)) => {
                let b = self.at(r, a.width())?;
                Some((a, b))
            }
            (Typed::Poly(l), Typed::Term(b)) => Some((self.at(l, b.width())?, b)),
            (Typed::Poly(_), Typed::Poly(_)) => None,
        })
    }

    fn elab<'a>(&self, ast: &'a Ast, want: Option<Width>) -> Result<Typed<'a>, TermError> {
        let t = match ast {
            Ast::Lit(v, pos) => match want {
                None => return Ok(Typed::Poly(ast)),
                Some(w) => {
                    if *v > mask(w) as u64 {
                        return perr(*pos, format!("literal {v} does not fit in {w} bits"));
                    }
                    Term::constant(*v as u32, w)
                }
            },
            Ast::Reg(i) => self
                .env
                .register(*i)
                .ok_or_else(|| TermError::UnknownIdent(format!("r{i}")))?,
            Ast::Ident(name) => self
                .env
                .input(name)
                .ok_or_else(|| TermError::UnknownIdent(name.clone()))?,
            Ast::Mem { wide, addr, pos } => {
                let a = self.at(addr, 32)?;
                let Some(base) = a.as_const() else {
                    return perr(*pos, "memory address must be a constant expression");
                };
                let read = |k: u32| {
                    self.env
                        .mem8(base.wrapping_add(k))
                        .ok_or_else(|| TermError::UnknownIdent("memory".into()))
                };
                if *wide {
                    let b = [read(0)?, read(1)?, read(2)?, read(3)?];
                    word_from_bytes([&b[0], &b[1], &b[2], &b[3]])
                } else {
                    read(0)?
                }
            }
            Ast::Ext { signed, e, width, pos } => {
                let inner = self.term(e, *pos, if *signed { "sx" } else { "zx" })?;
                let w = u8::try_from(*width).unwrap_or(0);
                let r = if *signed { inner.sx(w) } else { inner.zx(w) };
                r.map_err(|e| wrap(e, *pos))?
            }
            Ast::Extract { e, lo, width, pos } => {
                let inner = match self.elab(e, None)? {
                    Typed::Term(t) => t,
                    Typed::Poly(l) => self.at(l, 32)?,
                };
                let lo = u8::try_from(*lo).unwrap_or(u8::MAX);
                let w = u8::try_from(*width).unwrap_or(0);
                inner.extract(lo, w).map_err(|e| wrap(e, *pos))?
            }
            Ast::Ite(c, a, b, pos) => {
                let c = self.at(c, 1)?;
                match self.pair(a, b, want)? {
                    Some((a, b)) => Term::ite(&c, &a, &b).map_err(|e| wrap(e, *pos))?,
                    None => return Ok(Typed::Poly(ast)),
                }
            }
            Ast::Not(e, pos) => {
                let t = self.at(e, 1)?;
                if t.width() != 1 {
                    return perr(*pos, format!("`!` needs a 1-bit operand, got {} bits", t.width()));
                }
                t.not()
            }
            Ast::Logic { or, l, r, pos } => {
                let (a, b) = (self.at(l, 1)?, self.at(r, 1)?);
                if a.width() != 1 || b.width() != 1 {
                    let op = if *or { "||" } else { "&&" };
                    return perr(
                        *pos,
                        format!("`{op}` needs 1-bit operands, got {} and {} bits", a.width(), b.width()),
                    );
                }
                if *or {
                    a.or(&b)
                } else {
                    a.and(&b)
                }
            }
            Ast::Cmp { op, l, r, pos } => {
                let (a, b) = match self.pair(l, r, None)? {
                    Some(p) => p,
                    None => (self.at(l, 32)?, self.at(r, 32)?),
                };
                if a.width() != b.width() {
                    return perr(
                        *pos,
                        format!(
                            "`{op}` compares {} bits with {} bits; use zx or sx",
                            a.width(),
                            b.width()
                        ),
                    );
                }
                match *op {
                    "==" => a.eq_(&b),
                    "!=" => a.ne_(&b),
                    "<s" => a.slt(&b),
                    "<=s" => b.slt(&a).not(),
                    ">s" => b.slt(&a),
                    ">=s" => a.slt(&b).not(),
                    "<u" => a.ult(&b),
                    "<=u" => b.ult(&a).not(),
                    ">u" => b.ult(&a),
                    ">=u" => a.ult(&b).not(),
                    _ => unreachable!(),
                }
            }
            Ast::Arith { op, l, r, pos } => match self.pair(l, r, want)? {
                Some((a, b)) => {
                    if a.width() != b.width() {
                        return perr(
                            *pos,
                            format!(
                                "`{}` mixes {} bits with {} bits; use zx or sx",
                                op.name(),
                                a.width(),
                                b.width()
                            ),
                        );
                    }
                    Term::bin(*op, &a, &b).map_err(|e| wrap(e, *pos))?
                }
                None => return Ok(Typed::Poly(ast)),
            },
        };
        Ok(Typed::Term(t))
    }
}

/// Parses a 1-bit predicate.
pub fn parse_pred(text: &str, env: &dyn Env) -> Result<Term, TermError> {
    let ast = parse(text)?;
    let t = Elab { env }.at(&ast, 1)?;
    if t.width() != 1 {
        return perr(0, format!("predicate must be 1 bit wide, got {} bits", t.width()));
    }
    Ok(t)
}

/// Parses a value expression. Literal-only expressions take `default_width`.
pub fn parse_expr(text: &str, env: &dyn Env, default_width: Width) -> Result<Term, TermError> {
    let ast = parse(text)?;
    Elab { env }.at(&ast, default_width)
}

// ---- printing ------------------------------------------------------------

/// Fully parenthesized rendering. For 1-bit terms the output parses back
/// (given the same variables) to a term with identical semantics.
pub fn pretty(t: &Term) -> String {
    let mut s = String::new();
    print(t, false, &mut s);
    s
}

fn lit(v: u32) -> String {
    if v < 10 {
        v.to_string()
    } else {
        format!("0x{v:x}")
    }
}

fn print(t: &Term, width_from_context: bool, out: &mut String) {
    let w = t.width();
    match t.kind() {
        Kind::Const(c) => {
            if width_from_context || w == 32 {
                out.push_str(&lit(*c));
            } else {
                out.push_str(&format!("extract({}, 0, {w})", lit(*c)));
            }
        }
        Kind::Var(name) => out.push_str(name),
        Kind::Not(a) if w == 1 => {
            out.push('!');
            print(a, false, out);
        }
        Kind::Not(a) => {
            out.push('(');
            print(a, false, out);
            out.push_str(&format!(" ^ {})", lit(mask(w))));
        }
        Kind::Zx(a) | Kind::Sx(a) => {
            out.push_str(if matches!(t.kind(), Kind::Zx(_)) { "zx(" } else { "sx(" });
            print(a, false, out);
            out.push_str(&format!(", {w})"));
        }
        Kind::Extract(a, lo) => {
            out.push_str("extract(");
            print(a, false, out);
            out.push_str(&format!(", {lo}, {w})"));
        }
        Kind::Bin(op, a, b) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::And if w == 1 => "&&",
                BinOp::And => "&",
                BinOp::Or if w == 1 => "||",
                BinOp::Or => "|",
                BinOp::Xor => "^",
                BinOp::Shl => "<<",
                BinOp::Shrl => ">>u",
                BinOp::Shra => ">>s",
                BinOp::Eq => "==",
                BinOp::Slt => "<s",
                BinOp::Ult => "<u",
            };
            out.push('(');
            print(a, !b.is_const(), out);
            out.push_str(&format!(" {sym} "));
            print(b, !a.is_const(), out);
            out.push(')');
        }
        Kind::Ite(c, a, b) => {
            out.push_str("ite(");
            print(c, false, out);
            out.push_str(", ");
            print(a, !b.is_const(), out);
            out.push_str(", ");
            print(b, !a.is_const(), out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{eval, Assignment};

    struct Regs;
    impl Env for Regs {
        fn register(&self, i: usize) -> Option<Term> {
            Some(Term::var(&format!("reg{i}"), 32))
        }
        fn mem8(&self, addr: u32) -> Option<Term> {
            Some(Term::var(&format!("mem_{addr:x}"), 8))
        }
        fn input(&self, name: &str) -> Option<Term> {
            match name {
                "cmd" => Some(Term::var("cmd", 32)),
                "b" => Some(Term::var("b", 8)),
                _ => None,
            }
        }
    }

    #[test]
    fn bounds_check_predicate() {
        let t = parse_pred("r2 >=s 0 && r2 <s 16", &Regs).unwrap();
        assert_eq!(t.width(), 1);
        let Kind::Bin(BinOp::And, l, r) = t.kind() else {
            panic!("expected conjunction, got {t}");
        };
        assert_eq!(l.width(), 1);
        assert_eq!(r.width(), 1);
        let at = |v: u32| eval(&t, &Assignment::new().with("reg2", v)).unwrap();
        assert_eq!(at(0), 1);
        assert_eq!(at(15), 1);
        assert_eq!(at(16), 0);
        assert_eq!(at(u32::MAX), 0);
    }

    #[test]
    fn memory_word_equality() {
        let t = parse_pred("m32[0x100] == cmd", &Regs).unwrap();
        let a = Assignment::new()
            .with("mem_100", 0x78)
            .with("mem_101", 0x56)
            .with("mem_102", 0x34)
            .with("mem_103", 0x12)
            .with("cmd", 0x1234_5678);
        assert_eq!(eval(&t, &a), Ok(1));
    }

    #[test]
    fn dangling_operator() {
        let e = parse_pred("r1 + ", &Regs).unwrap_err();
        assert_eq!(
            e,
            TermError::Parse {
                pos: 5,
                msg: "unexpected end of input".into()
            }
        );
    }

    #[test]
    fn width_rules() {
        assert!(parse_pred("b == 3", &Regs).is_ok());
        assert!(parse_pred("b == 300", &Regs).is_err());
        assert!(matches!(parse_pred("b == cmd", &Regs), Err(TermError::Parse { .. })));
        assert!(parse_pred("zx(b, 32) == cmd", &Regs).is_ok());
        assert!(parse_pred("r1 && r2", &Regs).is_err());
        assert!(matches!(parse_pred("nope == 1", &Regs), Err(TermError::UnknownIdent(_))));
        assert!(parse_pred("r1 < 3", &Regs).is_err());
        assert!(parse_pred("b == ';'", &Regs).is_ok());
    }

    #[test]
    fn literal_expressions_adopt_width() {
        let t = parse_pred("b + (1 - 2) == 0", &Regs).unwrap();
        assert_eq!(eval(&t, &Assignment::new().with("b", 1)), Ok(1));
        let t = parse_expr("1 + 2", &Regs, 8).unwrap();
        assert_eq!(t, Term::constant(3, 8));
    }

    #[test]
    fn pretty_round_trip_simple() {
        let src = "(cmd <u 5) && !(b == 7) || extract(cmd, 8, 8) == b";
        let t = parse_pred(src, &Regs).unwrap();
        let again = parse_pred(&pretty(&t), &Regs).unwrap();
        assert_eq!(t, again, "{}", pretty(&t));
    }
}
