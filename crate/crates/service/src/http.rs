//! JSON API over the session engine.
//!
//! Every error body is a [`ServiceError`]. A message sent while the
//! session is still answering the previous one is refused with 409.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Mutex;

use hypograph_core::explain::{to_dot, to_tsv};

use crate::session::{Engine, ErrorCode, ServiceError, Session};

struct Entry {
    session: Arc<Mutex<Session>>,
    log: std::path::PathBuf,
}

pub struct AppState {
    engine: Arc<Engine>,
    sessions: RwLock<HashMap<String, Entry>>,
}

impl AppState {
    pub fn new(engine: Arc<Engine>) -> Arc<Self> {
        Arc::new(Self { engine, sessions: RwLock::new(HashMap::new()) })
    }
}

pub struct ApiError(StatusCode, ServiceError);

impl ApiError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        let err = ServiceError::new(code, message, uuid::Uuid::new_v4().simple().to_string());
        log::warn!("request failed [{}] trace {}: {}", code.as_str(), err.trace_id, err.message);
        Self(status_of(code), err)
    }
}

pub fn status_of(code: ErrorCode) -> StatusCode {
    match code {
        ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
        ErrorCode::NotFound => StatusCode::NOT_FOUND,
        ErrorCode::BackendUnavailable => StatusCode::SERVICE_UNAVAILABLE,
        ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        Self(status_of(e.code), e)
    }
}

#[derive(Deserialize)]
struct MessageBody {
    text: String,
}

fn lookup<T>(state: &AppState, id: &str, f: impl FnOnce(&Entry) -> T) -> Result<T, ApiError> {
    state
        .sessions
        .read()
        .unwrap()
        .get(id)
        .map(f)
        .ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no session {id}")))
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

async fn create_session(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let engine = state.engine.clone();
    let s = tokio::task::spawn_blocking(move || engine.open_session())
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?
        .map_err(|e| ApiError::new(ErrorCode::Internal, format!("cannot create session log: {e}")))?;
    let id = s.id.clone();
    let log = s.log_path().to_path_buf();
    state.sessions.write().unwrap().insert(id.clone(), Entry { session: Arc::new(Mutex::new(s)), log });
    Ok((StatusCode::CREATED, Json(json!({"session_id": id}))).into_response())
}

async fn post_message(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let s = lookup(&state, &id, |e| e.session.clone())?;
    let msg: MessageBody = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(ErrorCode::BadRequest, format!("expected {{\"text\": string}}: {e}")))?;
    let mut guard = s.try_lock_owned().map_err(|_| {
        let mut e = ApiError::new(ErrorCode::BadRequest, "turn in progress");
        e.0 = StatusCode::CONFLICT;
        e
    })?;
    let engine = state.engine.clone();
    let result = tokio::task::spawn_blocking(move || engine.handle(&mut guard, &msg.text))
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?;
    Ok(Json(result?).into_response())
}

async fn get_log(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    // Append-only and flushed per record, so readable mid-turn.
    let path = lookup(&state, &id, |e| e.log.clone())?;
    let text = tokio::task::spawn_blocking(move || std::fs::read_to_string(path))
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?
        .map_err(|e| ApiError::new(ErrorCode::Internal, format!("cannot read session log: {e}")))?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

async fn get_explanation(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let e = state
        .engine
        .explanation(&id)
        .ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no prediction {id}")))?;
    let mut v = serde_json::to_value(&e).map_err(|err| ApiError::new(ErrorCode::Internal, err.to_string()))?;
    let obj = v.as_object_mut().expect("explanation is an object");
    obj.insert("prediction_id".into(), id.into());
    obj.insert("tsv".into(), to_tsv(&e).into());
    obj.insert("dot".into(), to_dot(&e).into());
    Ok(Json(v).into_response())
}

async fn fallback() -> ApiError {
    ApiError::new(ErrorCode::NotFound, "no such endpoint")
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/message", post(post_message))
        .route("/api/sessions/{id}/log", get(get_log))
        .route("/api/predictions/{id}/explanation", get(get_explanation))
        .fallback(fallback)
        .with_state(state)
}

pub async fn serve(engine: Arc<Engine>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(engine))).await
}
