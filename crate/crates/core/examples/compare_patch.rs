//! Compare a command parser with a patch meant to block separator injection.

use std::path::Path;

use duet::compare::{compare, concretize};
use duet::solver::Solver;
use duet::symexec::{replay, Harness, Side};

fn main() {
    for name in ["post.json", "post_fixed.json"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("samples/serialization").join(name);
        let h = Harness::load(&path).expect("sample harness");
        let solver = Solver::new(h.config.solver_budget_bits);
        let cr = compare(&h, &solver).unwrap();
        println!("{name}: {} compatible pairs", cr.pairs.len());
        for p in &cr.pairs {
            let (s, t) = (cr.pre.terminal(p.pair.pre).unwrap(), cr.post.terminal(p.pair.post).unwrap());
            if !p.diff.channel_differs(0) {
                continue;
            }
            let input = concretize(s, t, &solver, &cr.domain).unwrap();
            let out = |side| {
                let r = replay(&h, side, &input);
                String::from_utf8_lossy(r.state.channels_out.get(&0).map(|v| v.as_slice()).unwrap_or(&[])).into_owned()
            };
            println!(
                "  pre#{} {} / post#{} {}: {input} prints {:?} then {:?}",
                p.pair.pre,
                s.terminal.as_ref().unwrap().name(),
                p.pair.post,
                t.terminal.as_ref().unwrap().name(),
                out(Side::Pre),
                out(Side::Post)
            );
        }
    }
}
