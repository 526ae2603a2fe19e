//! Query the report service in-process.

use std::path::Path;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::Request;
use duet::compare::compare;
use duet::report::build_report;
use duet::service::{router, Session};
use duet::solver::Solver;
use duet::symexec::Harness;
use tower::ServiceExt;

#[tokio::main]
async fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("samples/branching/branching.json");
    let h = Harness::load(&path).expect("sample harness");
    let doc = build_report(&compare(&h, &Solver::new(h.config.solver_budget_bits)).unwrap(), &h);
    let pairs: Vec<_> = doc.pairs.iter().map(|p| (p.pair.pre, p.pair.post)).collect();
    let app = router(Arc::new(Session::new(doc, false).unwrap()));
    for (pre, post) in pairs {
        for route in ["/concretize", "/exclusive"] {
            let body = serde_json::json!({"pre_leaf": pre, "post_leaf": post}).to_string();
            let req = Request::post(route).header("content-type", "application/json").body(Body::from(body)).unwrap();
            let resp = app.clone().oneshot(req).await.unwrap();
            let status = resp.status();
            let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
            println!("{route} {pre}/{post}: {status} {}", String::from_utf8_lossy(&bytes));
        }
    }
}
