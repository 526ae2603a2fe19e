use std::collections::HashMap;

use super::{mask, sign_extend, Assignment, Kind, Term, TermError};

/// Evaluates `t` under `a`, which must bind every free variable.
pub fn eval(t: &Term, a: &Assignment) -> Result<u32, TermError> {
    Evaluator::new(a).eval(t)
}

/// Memoizing evaluator; reuse one across many terms sharing structure.
pub struct Evaluator<'a> {
    assignment: &'a Assignment,
    memo: HashMap<u64, u32>,
}

impl<'a> Evaluator<'a> {
    pub fn new(assignment: &'a Assignment) -> Self {
        Evaluator {
            assignment,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, t: &Term) -> Result<u32, TermError> {
        if let Some(&v) = self.memo.get(&t.id()) {
            return Ok(v);
        }
        let w = t.width();
        let v = match t.kind() {
            Kind::Const(c) => *c,
            Kind::Var(name) => self
                .assignment
                .get(name)
                .ok_or_else(|| TermError::Unbound(name.to_string()))?,
            Kind::Not(a) => !self.eval(a)?,
            Kind::Zx(a) => self.eval(a)?,
            Kind::Sx(a) => sign_extend(self.eval(a)?, a.width()),
            Kind::Extract(a, lo) => self.eval(a)? >> lo,
            Kind::Bin(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                op.apply(x, y, a.width())
            }
            Kind::Ite(c, a, b) => {
                if self.eval(c)? == 1 {
                    self.eval(a)?
                } else {
                    self.eval(b)?
                }
            }
        } & mask(w);
        self.memo.insert(t.id(), v);
        Ok(v)
    }

    pub fn holds(&mut self, t: &Term) -> Result<bool, TermError> {
        Ok(self.eval(t)? == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Term;

    #[test]
    fn wraparound() {
        let x = Term::var("x", 32);
        let t = x.add(&Term::constant(1, 32));
        assert_eq!(eval(&t, &Assignment::new().with("x", 0xFFFF_FFFF)), Ok(0));
    }

    #[test]
    fn unsigned_less_than() {
        let x = Term::var("x", 32);
        let t = x.ult(&Term::constant(5, 32));
        assert_eq!(eval(&t, &Assignment::new().with("x", 4)), Ok(1));
    }

    #[test]
    fn unbound() {
        let t = Term::var("nobody", 8);
        assert_eq!(
            eval(&t, &Assignment::new()),
            Err(TermError::Unbound("nobody".into()))
        );
    }

    #[test]
    fn signed_ops() {
        let x = Term::var("x", 8);
        let a = Assignment::new().with("x", 0x80);
        assert_eq!(eval(&x.sx(32).unwrap(), &a), Ok(0xFFFF_FF80));
        assert_eq!(eval(&x.slt(&Term::constant(0, 8)), &a), Ok(1));
        assert_eq!(eval(&x.shra(&Term::constant(7, 8)), &a), Ok(0xFF));
        assert_eq!(eval(&x.shra(&Term::constant(200, 8)), &a), Ok(0xFF));
    }
}
