//! Local HTTP session service. Bodies are JSON; problems travel as text in
//! the problem file format. Field names are listed in the README.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use roundelim_core::cert::{verify_certificate, Certificate};
use roundelim_core::family::{auto_bound_observed, SearchConfig};
use roundelim_core::problem::{parse_problem, Side};
use roundelim_core::re::ReLimits;
use roundelim_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex as AsyncMutex;

use crate::ops::{diagram_json, error_code, zero_round_json};
use crate::session::{Action, Session};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(what: &str, id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no {what} `{id}`"))
    }

    fn conflict() -> ApiError {
        ApiError::new(StatusCode::CONFLICT, "conflict", "the session is busy with another request")
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> ApiError {
        let status = if e.is_budget() {
            StatusCode::UNPROCESSABLE_ENTITY
        } else {
            StatusCode::BAD_REQUEST
        };
        ApiError::new(status, error_code(&e), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Running,
    Done,
    Failed,
    Cancelled,
}

struct Job {
    session: String,
    re_steps: AtomicU64,
    cancel: AtomicBool,
    outcome: Mutex<(JobState, Option<Value>)>,
}

impl Job {
    fn view(&self, id: &str) -> Value {
        let (state, result) = self.outcome.lock().expect("job lock").clone();
        let mut v = json!({
            "id": id,
            "session": self.session,
            "state": state,
            "re_steps": self.re_steps.load(Ordering::Relaxed),
        });
        if let Some(r) = result {
            v["result"] = r;
        }
        v
    }
}

#[derive(Default)]
struct Registry {
    sessions: HashMap<String, Arc<AsyncMutex<Session>>>,
    jobs: HashMap<String, Arc<Job>>,
    next: u64,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Mutex<Registry>>,
    limits: ReLimits,
    snapshot_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(snapshot_dir: Option<PathBuf>) -> AppState {
        AppState {
            inner: Arc::default(),
            limits: ReLimits::default(),
            snapshot_dir,
        }
    }

    fn fresh_id(&self, prefix: &str) -> String {
        let mut r = self.inner.lock().expect("registry lock");
        r.next += 1;
        format!("{prefix}{}", r.next)
    }

    /// The shared session; holding its lock makes the service answer
    /// mutations of that session with a conflict.
    pub fn session_handle(&self, id: &str) -> Option<Arc<AsyncMutex<Session>>> {
        self.session(id).ok()
    }

    fn session(&self, id: &str) -> ApiResult<Arc<AsyncMutex<Session>>> {
        self.inner
            .lock()
            .expect("registry lock")
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    fn job(&self, id: &str) -> ApiResult<Arc<Job>> {
        self.inner
            .lock()
            .expect("registry lock")
            .jobs
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("job", id))
    }

    fn persist(&self, s: &Session) -> ApiResult<()> {
        if let Some(dir) = &self.snapshot_dir {
            let text = serde_json::to_string_pretty(&s.snapshot()).expect("serializable");
            std::fs::write(dir.join(format!("{}.json", s.id)), text)
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "snapshot_failed", e.to_string()))?;
        }
        Ok(())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/actions", post(apply_action))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/redo", post(redo))
        .route("/sessions/{id}/history", get(history))
        .route("/sessions/{id}/diagram", get(get_diagram))
        .route("/sessions/{id}/zeroround", get(get_zero_round))
        .route("/sessions/{id}/autobound", post(start_auto_bound))
        .route("/jobs/{id}", get(get_job).delete(cancel_job))
        .with_state(state)
}

/// Serves on `127.0.0.1:port` until the process ends.
pub async fn serve(port: u16, snapshot_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(snapshot_dir))).await
}

#[derive(Deserialize)]
struct CreateSession {
    problem: String,
}

async fn create_session(State(st): State<AppState>, Json(body): Json<CreateSession>) -> ApiResult<Response> {
    let p = parse_problem(&body.problem)?;
    let id = st.fresh_id("s");
    let session = Session::new(id.clone(), p);
    st.persist(&session)?;
    let view = session.view();
    st.inner
        .lock()
        .expect("registry lock")
        .sessions
        .insert(id, Arc::new(AsyncMutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn list_sessions(State(st): State<AppState>) -> Json<Value> {
    let mut ids: Vec<String> = st.inner.lock().expect("registry lock").sessions.keys().cloned().collect();
    ids.sort();
    Json(json!({ "sessions": ids }))
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = st.session(&id)?;
    let guard = s.try_lock().map_err(|_| ApiError::conflict())?;
    Ok(Json(json!(guard.view())))
}

async fn delete_session(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    st.inner
        .lock()
        .expect("registry lock")
        .sessions
        .remove(&id)
        .ok_or_else(|| ApiError::not_found("session", &id))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn apply_action(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Json(action): Json<Action>,
) -> ApiResult<Json<Value>> {
    let s = st.session(&id)?;
    let mut guard = s.try_lock_owned().map_err(|_| ApiError::conflict())?;
    let limits = st.limits;
    let st2 = st.clone();
    tokio::task::spawn_blocking(move || {
        guard.apply(action, &limits)?;
        st2.persist(&guard)?;
        Ok(Json(json!(guard.view())))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn move_cursor(st: AppState, id: String, forward: bool) -> ApiResult<Json<Value>> {
    let s = st.session(&id)?;
    let mut guard = s.try_lock().map_err(|_| ApiError::conflict())?;
    let moved = if forward { guard.redo() } else { guard.undo() };
    if !moved {
        let what = if forward { "redo" } else { "undo" };
        return Err(ApiError::new(StatusCode::CONFLICT, "no_history", format!("nothing to {what}")));
    }
    st.persist(&guard)?;
    Ok(Json(json!(guard.view())))
}

async fn undo(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    move_cursor(st, id, false).await
}

async fn redo(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    move_cursor(st, id, true).await
}

async fn history(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = st.session(&id)?;
    let guard = s.try_lock().map_err(|_| ApiError::conflict())?;
    Ok(Json(json!({ "cursor": guard.cursor(), "entries": guard.history() })))
}

#[derive(Deserialize)]
struct SideQuery {
    side: Option<String>,
}

fn side_of(q: &SideQuery, default: Side) -> ApiResult<Side> {
    match &q.side {
        None => Ok(default),
        Some(s) => Ok(s.parse::<Side>()?),
    }
}

async fn get_diagram(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SideQuery>,
) -> ApiResult<Json<Value>> {
    let side = side_of(&q, Side::Black)?;
    let s = st.session(&id)?;
    let guard = s.try_lock().map_err(|_| ApiError::conflict())?;
    Ok(Json(diagram_json(guard.current(), side)?))
}

async fn get_zero_round(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SideQuery>,
) -> ApiResult<Json<Value>> {
    let side = side_of(&q, Side::White)?;
    let s = st.session(&id)?;
    let guard = s.try_lock().map_err(|_| ApiError::conflict())?;
    Ok(Json(zero_round_json(guard.current(), side)?))
}

async fn start_auto_bound(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Option<Json<SearchConfig>>,
) -> ApiResult<Response> {
    let cfg = body.map(|Json(c)| c).unwrap_or_default();
    let problem = {
        let s = st.session(&id)?;
        let guard = s.try_lock().map_err(|_| ApiError::conflict())?;
        guard.current().clone()
    };
    let job_id = st.fresh_id("j");
    let job = Arc::new(Job {
        session: id,
        re_steps: AtomicU64::new(0),
        cancel: AtomicBool::new(false),
        outcome: Mutex::new((JobState::Running, None)),
    });
    st.inner
        .lock()
        .expect("registry lock")
        .jobs
        .insert(job_id.clone(), job.clone());
    let limits = st.limits;
    tokio::task::spawn_blocking(move || {
        let mut observe = |steps: u64| {
            job.re_steps.store(steps, Ordering::Relaxed);
            !job.cancel.load(Ordering::Relaxed)
        };
        let outcome = auto_bound_observed(&problem, &cfg, &mut observe).and_then(|out| {
            let cert = Certificate::from_chain(&out.chain);
            let report = verify_certificate(&cert, &limits)?;
            Ok((out, cert, report))
        });
        let next = match outcome {
            Ok((out, cert, report)) => {
                let state = if out.cancelled {
                    JobState::Cancelled
                } else {
                    JobState::Done
                };
                let result = json!({
                    "bound": report.bound,
                    "fixed_point": report.fixed_point,
                    "complete": out.chain.complete,
                    "candidates": out.candidates,
                    "certificate": cert,
                });
                (state, Some(result))
            }
            Err(e) => (
                JobState::Failed,
                Some(json!({ "error": { "code": error_code(&e), "message": e.to_string() } })),
            ),
        };
        *job.outcome.lock().expect("job lock") = next;
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "job": job_id }))).into_response())
}

async fn get_job(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(st.job(&id)?.view(&id)))
}

async fn cancel_job(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let job = st.job(&id)?;
    job.cancel.store(true, Ordering::Relaxed);
    Ok(Json(job.view(&id)))
}
