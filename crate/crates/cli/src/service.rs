//! In-memory reduction sessions over HTTP.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chemski_core::cost::{account_passes, CostReport};
use chemski_core::engine::PassSummary;
use chemski_core::token::plain_names;
use chemski_core::{serialize_mol, Ledger, Outcome, Reducer, StrategyConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::commands::decoded_term;
use crate::input::{InputError, RunSpec, Source};

/// Most passes one step request may run.
pub const MAX_PASSES_PER_REQUEST: u64 = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("no session `{0}`")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Conflict(String),
}

impl From<InputError> for ApiError {
    fn from(e: InputError) -> Self {
        ApiError::BadRequest(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

/// Every malformed body is a 400, whether bad JSON or a bad field.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let bytes: &[u8] = if bytes.is_empty() { b"{}" } else { bytes };
    serde_json::from_slice(bytes).map_err(|e| ApiError::BadRequest(e.to_string()))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateBody {
    term: Option<String>,
    mol: Option<String>,
    #[serde(flatten)]
    spec: RunSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepBody {
    #[serde(default = "one")]
    passes: u64,
}

fn one() -> u64 {
    1
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ConfigBody {
    weight: Option<f64>,
    max_steps_per_pass: Option<usize>,
}

pub struct Session {
    id: String,
    reducer: Reducer,
}

/// A session as seen by clients. `mol` uses plain edge names, so it can be
/// posted back as a new session.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub id: String,
    pub mol: String,
    pub nodes: usize,
    pub ledger: Ledger,
    pub cost_report: CostReport,
    pub step_count: u64,
    pub passes: u64,
    pub outcome: Option<Outcome>,
    pub config: StrategyConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoded_term: Option<String>,
}

impl Session {
    fn view(&self) -> SessionView {
        let r = &self.reducer;
        SessionView {
            id: self.id.clone(),
            mol: serialize_mol(&plain_names(&r.graph), chemski_core::mol::LineSep::Newline),
            nodes: r.graph.len(),
            ledger: r.ledger.clone(),
            cost_report: account_passes(&r.trace, &r.costs, r.passes()),
            step_count: r.steps(),
            passes: r.passes(),
            outcome: r.is_normal().then_some(Outcome::NormalForm),
            config: r.cfg.clone(),
            decoded_term: decoded_term(&r.graph),
        }
    }
}

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

impl AppState {
    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions.read().expect("session map").get(id).cloned().ok_or_else(|| ApiError::NotFound(id.to_owned()))
    }
}

pub fn router() -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show).delete(remove))
        .route("/sessions/{id}/step", post(step))
        .route("/sessions/{id}/config", axum::routing::patch(configure))
        .with_state(Arc::new(AppState::default()))
}

async fn create(
    State(app): State<Arc<AppState>>,
    bytes: Bytes,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let b: CreateBody = body(&bytes)?;
    let (g, warnings) = Source::pick(b.term, b.mol)?.load()?;
    let reducer = b.spec.reducer(g)?;
    let id = format!("s{}", app.next.fetch_add(1, Ordering::Relaxed) + 1);
    let session = Session { id: id.clone(), reducer };
    let state = session.view();
    app.sessions.write().expect("session map").insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "state": state, "warnings": warnings }))))
}

async fn show(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let s = app.get(&id)?;
    let view = s.lock().expect("session").view();
    Ok(Json(view))
}

async fn step(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<serde_json::Value>, ApiError> {
    let b: StepBody = body(&bytes)?;
    if b.passes == 0 || b.passes > MAX_PASSES_PER_REQUEST {
        return Err(ApiError::BadRequest(format!("passes must lie in 1..={MAX_PASSES_PER_REQUEST}")));
    }
    let s = app.get(&id)?;
    tokio::task::spawn_blocking(move || {
        let mut s = s.lock().expect("session");
        if s.reducer.is_normal() {
            return Err(ApiError::Conflict(format!("session `{}` is already in normal form", s.id)));
        }
        let mut records: Vec<PassSummary> = Vec::new();
        for _ in 0..b.passes {
            let summary = s.reducer.step_pass();
            let done = summary.normal_form;
            records.push(summary);
            if done {
                break;
            }
        }
        Ok(Json(json!({ "records": records, "state": s.view() })))
    })
    .await
    .expect("step task")
}

async fn configure(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<serde_json::Value>, ApiError> {
    let b: ConfigBody = body(&bytes)?;
    let s = app.get(&id)?;
    let mut s = s.lock().expect("session");
    let mut cfg = s.reducer.cfg.clone();
    if let Some(w) = b.weight {
        cfg.weight = w;
    }
    if b.max_steps_per_pass.is_some() {
        cfg.max_steps_per_pass = b.max_steps_per_pass;
    }
    cfg.check().map_err(|e| ApiError::BadRequest(e.to_string()))?;
    s.reducer.cfg = cfg;
    Ok(Json(json!({ "state": s.view() })))
}

async fn remove(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    match app.sessions.write().expect("session map").remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::NotFound(id)),
    }
}

pub async fn serve(addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
