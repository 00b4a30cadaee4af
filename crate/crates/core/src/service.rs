//! Session-based HTTP facade over [`Engine`].
//!
//! Routes:
//! - `POST /sessions` creates a session.
//! - `POST /sessions/{id}/commands` runs one command line.
//! - `GET /sessions/{id}/scene`, `/validation`, `/ranked?attr=`, `/export` read state.
//! - `POST /sessions/{id}/undo` and `/redo`, `DELETE /sessions/{id}`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Mutex;
use uuid::Uuid;

use crate::engine::Engine;
use crate::error::EngineError;
use crate::persist::{self, GalleryClient};

pub const BIND_ENV: &str = "MARVIST_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:7878";

struct Session {
    engine: Arc<Mutex<Engine>>,
    /// Last committed scene document, readable while a command runs.
    snapshot: RwLock<Arc<Value>>,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<Uuid, Arc<Session>>>>,
    gallery: GalleryClient,
    base_dir: PathBuf,
}

impl AppState {
    pub fn new(gallery: GalleryClient, base_dir: impl Into<PathBuf>) -> Self {
        Self {
            sessions: Arc::default(),
            gallery,
            base_dir: base_dir.into(),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        let id = Uuid::parse_str(id).map_err(|_| ApiError::unknown_session(id))?;
        self.sessions
            .read()
            .expect("session table poisoned")
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(&id.to_string()))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn unknown_session(id: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            code: "UnknownSession".into(),
            message: format!("no session {id}"),
        }
    }

    fn internal(message: String) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "Internal".into(),
            message,
        }
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn document_value(engine: &Engine) -> ApiResult<Value> {
    serde_json::to_value(engine.document()).map_err(|e| ApiError::internal(e.to_string()))
}

async fn create_session(State(state): State<AppState>) -> ApiResult<(StatusCode, Json<Value>)> {
    let engine = Engine::new(state.gallery.clone()).with_base_dir(state.base_dir.clone());
    let snapshot = document_value(&engine)?;
    let id = Uuid::new_v4();
    let session = Session {
        engine: Arc::new(Mutex::new(engine)),
        snapshot: RwLock::new(Arc::new(snapshot)),
    };
    state
        .sessions
        .write()
        .expect("session table poisoned")
        .insert(id, Arc::new(session));
    Ok((StatusCode::CREATED, Json(json!({"session": id.to_string(), "seq": 0}))))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let session = state.session(&id)?;
    state
        .sessions
        .write()
        .expect("session table poisoned")
        .retain(|_, s| !Arc::ptr_eq(s, &session));
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
pub struct CommandBody {
    pub command: String,
    /// Number of commands the client believes have been applied.
    #[serde(default)]
    pub seq: Option<u64>,
}

struct Applied {
    outcome: Value,
    snapshot: Value,
}

async fn run_on_session(
    session: Arc<Session>,
    seq: Option<u64>,
    work: impl FnOnce(&mut Engine) -> Result<Value, EngineError> + Send + 'static,
) -> ApiResult<Json<Value>> {
    // The fair async mutex hands out the engine in arrival order.
    let mut guard = session.engine.clone().lock_owned().await;
    let applied = tokio::task::spawn_blocking(move || -> ApiResult<(Applied, u64)> {
        let engine = &mut *guard;
        let count = engine.applied_commands();
        if let Some(s) = seq {
            if s != count {
                return Err(ApiError {
                    status: StatusCode::CONFLICT,
                    code: "Conflict".into(),
                    message: format!("ordering token {s} does not match session position {count}"),
                });
            }
        }
        let outcome = work(engine)?;
        let snapshot = document_value(engine)?;
        Ok((Applied { outcome, snapshot }, engine.applied_commands()))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    let (applied, seq) = applied;
    *session.snapshot.write().expect("snapshot poisoned") = Arc::new(applied.snapshot);
    let mut body = applied.outcome;
    body["seq"] = seq.into();
    Ok(Json(body))
}

async fn post_command(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<CommandBody>,
) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let line = body.command;
    run_on_session(session, body.seq, move |engine| {
        let outcome = engine
            .execute_line(&line)?
            .ok_or_else(|| EngineError::Parse("empty command".into()))?;
        Ok(json!({"outcome": outcome, "report": outcome.report}))
    })
    .await
}

async fn post_undo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    run_on_session(session, None, |engine| {
        let outcome = engine.execute_line("undo")?;
        Ok(json!({"outcome": outcome}))
    })
    .await
}

async fn post_redo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    run_on_session(session, None, |engine| {
        let outcome = engine.execute_line("redo")?;
        Ok(json!({"outcome": outcome}))
    })
    .await
}

async fn get_scene(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let snap = session.snapshot.read().expect("snapshot poisoned").clone();
    Ok(Json((*snap).clone()))
}

async fn get_validation(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let engine = session.engine.lock().await;
    Ok(Json(json!({
        "last": engine.last_report(),
        "reports": engine.scene().diagnostics,
    })))
}

#[derive(Debug, Deserialize)]
pub struct RankedQuery {
    pub attr: String,
}

async fn get_ranked(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<RankedQuery>,
) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let engine = session.engine.lock().await;
    let ranked = engine.scene().ranked_channels(&q.attr)?;
    let rec = engine.scene().recommend(&q.attr)?;
    Ok(Json(json!({"attr": q.attr, "ranked": ranked, "recommended": rec})))
}

async fn get_export(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let engine = session.engine.lock().await;
    let doc = persist::export_document(engine.scene())?;
    serde_json::to_value(doc)
        .map(Json)
        .map_err(|e| ApiError::internal(e.to_string()))
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/commands", post(post_command))
        .route("/sessions/{id}/undo", post(post_undo))
        .route("/sessions/{id}/redo", post(post_redo))
        .route("/sessions/{id}/scene", get(get_scene))
        .route("/sessions/{id}/validation", get(get_validation))
        .route("/sessions/{id}/ranked", get(get_ranked))
        .route("/sessions/{id}/export", get(get_export))
        .with_state(state)
}

pub fn bind_address() -> Result<SocketAddr, EngineError> {
    let raw = std::env::var(BIND_ENV).unwrap_or_else(|_| DEFAULT_BIND.to_string());
    raw.parse()
        .map_err(|_| EngineError::InvalidArgument(format!("{BIND_ENV}='{raw}' is not host:port")))
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
