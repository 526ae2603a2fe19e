//! Build, simplify, print, parse and evaluate bitvector terms.

use std::collections::BTreeSet;

use duet::term::{eval, parse_pred, pretty, Assignment, InputsOnly, Term, Var};

fn main() {
    let x = Term::var("x", 8);
    let zero = Term::constant(0, 8);
    let t = x.add(&zero).xor(&x);
    println!("x + 0 ^ x simplifies to the constant {:?}", t.as_const());

    let vars: BTreeSet<Var> = [Var::new("x", 8), Var::new("y", 8)].into_iter().collect();
    let p = parse_pred("x + y == 0x10 && x <u 4", &InputsOnly::new(&vars)).expect("valid predicate");
    println!("parsed: {}", pretty(&p));
    let a = Assignment::new().with("x", 3).with("y", 13);
    println!("under {a}: {}", eval(&p, &a).unwrap());
    println!("with x fixed to 3: {}", pretty(&p.substitute(&Assignment::new().with("x", 3))));
}
