//! Build the report document, then prune and compress it.

use std::path::Path;

use duet::compare::compare;
use duet::report::{build_report, compress, parse_relations, prune, textual_report};
use duet::solver::Solver;
use duet::symexec::Harness;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("samples/serialization/post.json");
    let h = Harness::load(&path).expect("sample harness");
    let doc = build_report(&compare(&h, &Solver::new(h.config.solver_budget_bits)).unwrap(), &h);
    print!("{}", textual_report(&doc));

    let errored = parse_relations(&["either-errored".to_string()], None).unwrap();
    let v = prune(&doc, &errored);
    println!("either-errored keeps pre {:?} and post {:?}", v.visible_pre, v.visible_post);
    for level in 0..=2 {
        println!("compression {level}: {} pre nodes", compress(&doc.trees.pre, level).nodes.len());
    }
    println!("report JSON: {} bytes", doc.to_json().len());
}
