//! HTTP service over a finished report: the document itself plus on-demand
//! concretions, exclusive inputs and pruning.

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::compare::{classify_sets, concretize_sets, Classification};
use crate::report::{parse_relations, prune, ReportDocument, Tree, Visible};
use crate::solver::{Solver, SolverError};
use crate::symexec::{NodeId, Side};
use crate::term::{eval, parse_pred, Assignment, InputsOnly, Term, Var};

pub const DEFAULT_PORT: u16 = 8731;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl From<SolverError> for ApiError {
    fn from(e: SolverError) -> Self {
        let status = match e {
            SolverError::BudgetExceeded { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.message}))).into_response()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRequest {
    pub pre_leaf: NodeId,
    pub post_leaf: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcretizeResponse {
    pub model: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusiveResponse {
    pub pre_only: Option<Assignment>,
    pub post_only: Option<Assignment>,
    pub classification: Classification,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneRequest {
    #[serde(default)]
    pub relations: Vec<String>,
    #[serde(default)]
    pub regex: Option<String>,
}

/// A loaded report with its leaves' constraints re-parsed and a solver
/// whose caches live as long as the session.
pub struct Session {
    pub doc: ReportDocument,
    constraints: [BTreeMap<NodeId, Vec<Term>>; 2],
    vocabulary: BTreeSet<Var>,
    pub solver: Solver,
    pub static_only: bool,
}

fn leaf_constraints(tree: &Tree, env: &InputsOnly) -> Result<BTreeMap<NodeId, Vec<Term>>, String> {
    let mut out = BTreeMap::new();
    for &leaf in &tree.leaves {
        let terms = tree
            .path_constraints(leaf)
            .iter()
            .map(|c| parse_pred(c, env).map_err(|e| format!("leaf {leaf}: `{c}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        out.insert(leaf, terms);
    }
    Ok(out)
}

impl Session {
    pub fn new(doc: ReportDocument, static_only: bool) -> Result<Session, String> {
        let vocabulary: BTreeSet<Var> = doc.meta.vocabulary.iter().cloned().collect();
        let env = InputsOnly::new(&vocabulary);
        let constraints = [leaf_constraints(&doc.trees.pre, &env)?, leaf_constraints(&doc.trees.post, &env)?];
        let solver = Solver::new(doc.meta.solver_budget_bits);
        Ok(Session {
            doc,
            constraints,
            vocabulary,
            solver,
            static_only,
        })
    }

    fn leaf(&self, side: Side, id: NodeId) -> Result<&[Term], ApiError> {
        let i = if side == Side::Pre { 0 } else { 1 };
        self.constraints[i]
            .get(&id)
            .map(|v| v.as_slice())
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no {side} leaf {id}")))
    }

    /// A shared input for a compatible pair, checked against both leaves.
    pub fn concretize(&self, req: &PairRequest) -> Result<ConcretizeResponse, ApiError> {
        let (a, b) = (self.leaf(Side::Pre, req.pre_leaf)?, self.leaf(Side::Post, req.post_leaf)?);
        if self.doc.pair(req.pre_leaf, req.post_leaf).is_none() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                format!("pre leaf {} and post leaf {} are not a compatible pair", req.pre_leaf, req.post_leaf),
            ));
        }
        let model = concretize_sets(a, b, &self.solver, &self.vocabulary)?
            .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "joint constraints are unsatisfiable"))?;
        let verified = a.iter().chain(b).all(|t| eval(t, &model).map(|v| v == 1).unwrap_or(false));
        if !verified {
            return Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "model failed re-verification"));
        }
        Ok(ConcretizeResponse { model })
    }

    pub fn exclusive(&self, req: &PairRequest) -> Result<ExclusiveResponse, ApiError> {
        let (a, b) = (self.leaf(Side::Pre, req.pre_leaf)?, self.leaf(Side::Post, req.post_leaf)?);
        let e = classify_sets(a, b, &self.solver, &self.vocabulary)?;
        Ok(ExclusiveResponse {
            pre_only: e.pre_only,
            post_only: e.post_only,
            classification: e.classification,
        })
    }

    pub fn prune(&self, req: &PruneRequest) -> Result<Visible, ApiError> {
        let rel = parse_relations(&req.relations, req.regex.as_deref())
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
        Ok(prune(&self.doc, &rel))
    }
}

fn body<T: serde::de::DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

type Shared = Arc<Session>;

async fn report(State(s): State<Shared>) -> Json<ReportDocument> {
    Json(s.doc.clone())
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

async fn concretize(State(s): State<Shared>, b: Bytes) -> Result<Json<ConcretizeResponse>, ApiError> {
    let req: PairRequest = body(&b)?;
    tokio::task::spawn_blocking(move || s.concretize(&req).map(Json))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

async fn exclusive(State(s): State<Shared>, b: Bytes) -> Result<Json<ExclusiveResponse>, ApiError> {
    let req: PairRequest = body(&b)?;
    tokio::task::spawn_blocking(move || s.exclusive(&req).map(Json))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

async fn prune_route(State(s): State<Shared>, b: Bytes) -> Result<Json<Visible>, ApiError> {
    let req: PruneRequest = body(&b)?;
    s.prune(&req).map(Json)
}

/// Routes for a session. `static_only` sessions serve the document and
/// health check but no solver endpoints.
pub fn router(session: Arc<Session>) -> Router {
    let mut r = Router::new()
        .route("/report", get(report))
        .route("/health", get(health))
        .route("/prune", post(prune_route));
    if !session.static_only {
        r = r.route("/concretize", post(concretize)).route("/exclusive", post(exclusive));
    }
    r.with_state(session)
}

/// Serves until the process is stopped.
pub async fn serve(session: Session, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving report on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(session))).await
}
