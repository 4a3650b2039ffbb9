//! HTTP facade over sessions: a problem, its statements and cached results.
//!
//! Every mutation bumps the session revision, and results carry the
//! revision they were computed from so stale results are visible. Runs go
//! to a blocking thread; while one is in flight the session rejects
//! mutations and further runs with 409.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bundle::{execute, ResultBundle, RunRequest};
use crate::compat::{check_problem, CompatibilityReport};
use crate::problem::{parse_problem, ConfigOverrides, ProblemFile};
use crate::statement::{format_statement, parse_statement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Idle,
    Running,
    Done,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatementEntry {
    /// Stable within the session; never reused.
    pub id: u64,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: u64,
    pub revision: u64,
    /// The uploaded problem; its `preferences` mirror `statements`.
    pub problem: ProblemFile,
    pub statements: Vec<StatementEntry>,
    next_statement: u64,
    pub status: RunStatus,
    pub error: Option<String>,
    pub results_revision: Option<u64>,
    pub bundle: Option<ResultBundle>,
}

impl Session {
    fn new(id: u64, mut problem: ProblemFile) -> Self {
        let statements: Vec<StatementEntry> = problem
            .preferences
            .iter()
            .enumerate()
            .map(|(k, text)| StatementEntry { id: k as u64 + 1, text: text.clone() })
            .collect();
        problem.preferences = statements.iter().map(|s| s.text.clone()).collect();
        Session {
            id,
            revision: 1,
            problem,
            next_statement: statements.len() as u64 + 1,
            statements,
            status: RunStatus::Idle,
            error: None,
            results_revision: None,
            bundle: None,
        }
    }

    fn sync_preferences(&mut self) {
        self.problem.preferences = self.statements.iter().map(|s| s.text.clone()).collect();
        self.revision += 1;
    }

    fn stale(&self) -> bool {
        self.results_revision.is_some_and(|r| r != self.revision)
    }

    fn compatibility(&self) -> Result<CompatibilityReport, ApiError> {
        let eps = self.problem.config.run_config().epsilon_min;
        check_problem(&self.problem, self.problem.config.scale_mode(), eps)
            .map_err(|e| ApiError::unprocessable(e.to_string()))
    }

    fn summary(&self) -> serde_json::Value {
        json!({
            "id": self.id,
            "revision": self.revision,
            "status": self.status,
            "criteria": self.problem.criteria.len(),
            "alternatives": self.problem.alternatives.len(),
            "statements": self.statements.len(),
            "results_revision": self.results_revision,
            "stale": self.stale(),
        })
    }

    fn view(&self) -> serde_json::Value {
        json!({
            "id": self.id,
            "revision": self.revision,
            "status": self.status,
            "error": self.error,
            "problem": self.problem,
            "statements": self.statements,
            "results_revision": self.results_revision,
            "stale": self.stale(),
        })
    }
}

type SessionRef = Arc<Mutex<Session>>;

/// Shared server state: one lock for the index, one per session.
#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<BTreeMap<u64, SessionRef>>>,
    data_dir: Option<Arc<PathBuf>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

impl AppState {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads every `session-*.json` under `dir`; runs that were in flight
    /// when the files were written come back as idle.
    pub fn persistent(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let mut sessions = BTreeMap::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            let is_session = path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("session-") && n.ends_with(".json"));
            if !is_session {
                continue;
            }
            let text = fs::read_to_string(&path)?;
            let mut s: Session = serde_json::from_str(&text).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))
            })?;
            if s.status == RunStatus::Running {
                s.status = RunStatus::Idle;
            }
            sessions.insert(s.id, Arc::new(Mutex::new(s)));
        }
        Ok(AppState { sessions: Arc::new(Mutex::new(sessions)), data_dir: Some(Arc::new(dir.to_path_buf())) })
    }

    fn get(&self, id: u64) -> Result<SessionRef, ApiError> {
        lock(&self.sessions).get(&id).cloned().ok_or(ApiError::not_found(id))
    }

    fn persist(&self, session: &Session) {
        if let Some(dir) = &self.data_dir {
            let path = dir.join(format!("session-{}.json", session.id));
            let text = serde_json::to_string_pretty(session).expect("sessions serialize");
            if let Err(e) = fs::write(&path, text) {
                eprintln!("cannot persist {}: {e}", path.display());
            }
        }
    }
}

/// An error response with a JSON body.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn not_found(id: u64) -> Self {
        ApiError { status: StatusCode::NOT_FOUND, body: json!({ "error": format!("no session {id}") }) }
    }

    fn busy() -> Self {
        ApiError { status: StatusCode::CONFLICT, body: json!({ "error": "a run is in flight for this session" }) }
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, body: json!({ "error": message.into() }) }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn idle(session: &Session) -> ApiResult<()> {
    if session.status == RunStatus::Running {
        Err(ApiError::busy())
    } else {
        Ok(())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/statements", post(add_statement))
        .route("/sessions/{id}/statements/{sid}", delete(remove_statement))
        .route("/sessions/{id}/compatibility", get(compatibility))
        .route("/sessions/{id}/run", post(start_run))
        .route("/sessions/{id}/status", get(status))
        .route("/sessions/{id}/results", get(results))
        .route("/sessions/{id}/results/{file}", get(result_file))
        .with_state(state)
}

async fn create_session(
    State(state): State<AppState>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::unprocessable("body is not UTF-8"))?;
    let problem = parse_problem(text).map_err(|d| ApiError {
        status: StatusCode::UNPROCESSABLE_ENTITY,
        body: json!({ "error": d.message, "line": d.line, "column": d.column }),
    })?;
    let session = {
        let mut sessions = lock(&state.sessions);
        let id = sessions.keys().next_back().map_or(1, |k| k + 1);
        let session = Session::new(id, problem);
        sessions.insert(id, Arc::new(Mutex::new(session.clone())));
        session
    };
    state.persist(&session);
    Ok((StatusCode::CREATED, Json(session.view())))
}

async fn list_sessions(State(state): State<AppState>) -> Json<serde_json::Value> {
    let refs: Vec<SessionRef> = lock(&state.sessions).values().cloned().collect();
    Json(serde_json::Value::Array(refs.iter().map(|s| lock(s).summary()).collect()))
}

async fn get_session(State(state): State<AppState>, UrlPath(id): UrlPath<u64>) -> ApiResult<Json<serde_json::Value>> {
    let s = state.get(id)?;
    let view = lock(&s).view();
    Ok(Json(view))
}

#[derive(Debug, Deserialize)]
pub struct NewStatement {
    pub text: String,
}

async fn add_statement(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<u64>,
    Json(req): Json<NewStatement>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let s = state.get(id)?;
    let mut session = lock(&s);
    idle(&session)?;
    let labels = session.problem.labels();
    let parsed = parse_statement(&req.text, &labels).map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let text = format_statement(&parsed, &labels);

    let mut trial = session.clone();
    trial.statements.push(StatementEntry { id: trial.next_statement, text });
    trial.problem.preferences = trial.statements.iter().map(|s| s.text.clone()).collect();
    let report = trial.compatibility()?;
    if !report.compatible {
        let binding: Vec<serde_json::Value> = report
            .statements
            .iter()
            .zip(&trial.statements)
            .filter(|(status, _)| status.binding)
            .map(|(status, entry)| json!({ "id": entry.id, "text": status.text }))
            .collect();
        return Err(ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({
                "error": "the statement is incompatible with the current ones",
                "epsilon_star": report.epsilon_star,
                "binding": binding,
                "revision": session.revision,
            }),
        });
    }
    trial.next_statement += 1;
    trial.sync_preferences();
    *session = trial;
    state.persist(&session);
    let added = session.statements.last().expect("just pushed").clone();
    Ok((
        StatusCode::CREATED,
        Json(json!({ "statement": added, "revision": session.revision, "epsilon_star": report.epsilon_star })),
    ))
}

async fn remove_statement(
    State(state): State<AppState>,
    UrlPath((id, sid)): UrlPath<(u64, u64)>,
) -> ApiResult<Json<serde_json::Value>> {
    let s = state.get(id)?;
    let mut session = lock(&s);
    idle(&session)?;
    let at = session.statements.iter().position(|e| e.id == sid).ok_or_else(|| ApiError {
        status: StatusCode::NOT_FOUND,
        body: json!({ "error": format!("no statement {sid} in session {id}") }),
    })?;
    let removed = session.statements.remove(at);
    session.sync_preferences();
    state.persist(&session);
    Ok(Json(json!({ "removed": removed, "revision": session.revision })))
}

async fn compatibility(State(state): State<AppState>, UrlPath(id): UrlPath<u64>) -> ApiResult<Json<serde_json::Value>> {
    let s = state.get(id)?;
    let session = lock(&s);
    let report = session.compatibility()?;
    let mut body = serde_json::to_value(&report).expect("reports serialize");
    body["revision"] = json!(session.revision);
    Ok(Json(body))
}

async fn start_run(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<u64>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let overrides: ConfigOverrides = if body.iter().all(u8::is_ascii_whitespace) {
        ConfigOverrides::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::unprocessable(format!("run config: {e}")))?
    };
    let s = state.get(id)?;
    let (request, revision) = {
        let mut session = lock(&s);
        idle(&session)?;
        let merged = session.problem.config.merged_with(&overrides);
        let request = RunRequest {
            problem: session.problem.clone(),
            config: merged.run_config(),
            scale_mode: merged.scale_mode(),
            scale: None,
        };
        session.status = RunStatus::Running;
        session.error = None;
        (request, session.revision)
    };
    let task_state = state.clone();
    let task_session = Arc::clone(&s);
    tokio::task::spawn_blocking(move || {
        let outcome = execute(&request);
        let mut session = lock(&task_session);
        match outcome {
            Ok(bundle) => {
                session.bundle = Some(bundle);
                session.results_revision = Some(revision);
                session.status = RunStatus::Done;
            }
            Err(e) => {
                session.error = Some(e.to_string());
                session.status = RunStatus::Failed;
            }
        }
        task_state.persist(&session);
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "status": RunStatus::Running, "revision": revision }))))
}

async fn status(State(state): State<AppState>, UrlPath(id): UrlPath<u64>) -> ApiResult<Json<serde_json::Value>> {
    let s = state.get(id)?;
    let session = lock(&s);
    Ok(Json(json!({
        "status": session.status,
        "error": session.error,
        "revision": session.revision,
        "results_revision": session.results_revision,
        "stale": session.stale(),
    })))
}

async fn results(State(state): State<AppState>, UrlPath(id): UrlPath<u64>) -> ApiResult<Json<serde_json::Value>> {
    let s = state.get(id)?;
    let session = lock(&s);
    Ok(Json(json!({
        "status": session.status,
        "revision": session.revision,
        "results_revision": session.results_revision,
        "stale": session.stale(),
        "bundle": session.bundle,
    })))
}

/// One bundle file, byte for byte what `rank --out` writes.
async fn result_file(
    State(state): State<AppState>,
    UrlPath((id, file)): UrlPath<(u64, String)>,
) -> ApiResult<Response> {
    let s = state.get(id)?;
    let session = lock(&s);
    let bundle = session
        .bundle
        .as_ref()
        .ok_or_else(|| ApiError { status: StatusCode::NOT_FOUND, body: json!({ "error": "no results yet" }) })?;
    let (name, contents) = bundle.files().into_iter().find(|(name, _)| *name == file).ok_or_else(|| ApiError {
        status: StatusCode::NOT_FOUND,
        body: json!({ "error": format!("no bundle file {file:?}") }),
    })?;
    let content_type = if name.ends_with(".json") { "application/json" } else { "text/csv" };
    Ok(([(header::CONTENT_TYPE, content_type)], contents).into_response())
}

/// Serves until interrupted.
pub async fn serve(bind: &str, port: u16, data_dir: Option<PathBuf>) -> std::io::Result<()> {
    let state = match &data_dir {
        Some(dir) => AppState::persistent(dir)?,
        None => AppState::in_memory(),
    };
    let listener = tokio::net::TcpListener::bind((bind, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
