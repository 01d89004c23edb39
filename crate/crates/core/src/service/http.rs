use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock, TryLockError};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use uuid::Uuid;

use super::session::{Condition, FinalScores, Session, SessionError, SessionView};
use crate::io::{write_json, Scenario};
use crate::smw::GoalSpec;

/// Environment variable naming the directory finished sessions are
/// written to.
pub const SESSION_DIR_ENV: &str = "SMW_SESSION_DIR";

/// A playable environment and the subgoals offered in the subgoal
/// condition.
#[derive(Debug, Clone)]
pub struct EnvEntry {
    pub scenario: Arc<Scenario>,
    pub subgoals: Vec<GoalSpec>,
}

/// Shared service state. Each session sits behind its own lock; a step that
/// finds the lock taken is answered with a conflict instead of waiting.
#[derive(Debug)]
pub struct AppState {
    envs: BTreeMap<String, EnvEntry>,
    sessions: RwLock<HashMap<Uuid, Arc<Mutex<Session>>>>,
    out_dir: PathBuf,
}

impl AppState {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            envs: BTreeMap::new(),
            sessions: RwLock::new(HashMap::new()),
            out_dir: out_dir.into(),
        }
    }

    /// Uses `$SMW_SESSION_DIR`, falling back to `./sessions`.
    pub fn from_env() -> Self {
        Self::new(
            std::env::var_os(SESSION_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| "sessions".into()),
        )
    }

    pub fn with_env(mut self, env_id: impl Into<String>, scenario: Scenario, subgoals: Vec<GoalSpec>) -> Self {
        self.envs.insert(
            env_id.into(),
            EnvEntry {
                scenario: Arc::new(scenario),
                subgoals,
            },
        );
        self
    }

    pub fn out_dir(&self) -> &std::path::Path {
        &self.out_dir
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        let not_found = || SessionError::NotFound(format!("no session `{id}`"));
        let uuid = Uuid::parse_str(id).map_err(|_| not_found())?;
        self.sessions
            .read()
            .expect("session table lock")
            .get(&uuid)
            .cloned()
            .ok_or_else(not_found)
    }

    pub fn create(&self, req: &CreateSession) -> Result<CreateResponse, SessionError> {
        let entry = self
            .envs
            .get(&req.env_id)
            .ok_or_else(|| SessionError::validation("env_id", format!("unknown environment `{}`", req.env_id)))?;
        let subgoals = match req.condition {
            Condition::NoSubgoal => Vec::new(),
            Condition::Subgoal if entry.subgoals.is_empty() => {
                return Err(SessionError::validation(
                    "condition",
                    "no subgoal is configured for this environment",
                ))
            }
            Condition::Subgoal => entry.subgoals.clone(),
        };
        let program = entry.scenario.program_with(subgoals);
        let id = Uuid::new_v4();
        let session = Session::new(id, req.env_id.clone(), req.condition, entry.scenario.clone(), program);
        let view = session.view();
        self.sessions
            .write()
            .expect("session table lock")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(CreateResponse { session_id: id, view })
    }

    pub fn step(&self, id: &str, body: &[u8]) -> Result<super::StepResponse, SessionError> {
        let req: StepRequest = parse_body(body)?;
        let cell = self.session(id)?;
        let mut session = match cell.try_lock() {
            Ok(s) => s,
            Err(TryLockError::WouldBlock) => return Err(SessionError::Conflict("another step is in progress".into())),
            Err(TryLockError::Poisoned(_)) => return Err(SessionError::Internal("session state is poisoned".into())),
        };
        session.step(&req.action)
    }

    pub fn view(&self, id: &str) -> Result<SessionView, SessionError> {
        let cell = self.session(id)?;
        let session = cell
            .lock()
            .map_err(|_| SessionError::Internal("session state is poisoned".into()))?;
        Ok(session.view())
    }

    /// Ends the session and writes `<out_dir>/<session_id>.json`.
    pub fn finish(&self, id: &str) -> Result<FinishResponse, SessionError> {
        let cell = self.session(id)?;
        let mut session = match cell.try_lock() {
            Ok(s) => s,
            Err(TryLockError::WouldBlock) => return Err(SessionError::Conflict("a step is in progress".into())),
            Err(TryLockError::Poisoned(_)) => return Err(SessionError::Internal("session state is poisoned".into())),
        };
        let record = session.finish()?;
        let path = self.out_dir.join(format!("{}.json", record.session_id));
        let written = std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| e.to_string())
            .and_then(|_| write_json(&path, &record).map_err(|e| e.to_string()));
        if let Err(msg) = written {
            session.unmark_persisted();
            return Err(SessionError::Internal(format!("could not persist session: {msg}")));
        }
        Ok(FinishResponse {
            session_id: record.session_id,
            scores: record.scores,
            record_path: path,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub env_id: String,
    pub condition: Condition,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRequest {
    pub action: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: Uuid,
    pub view: SessionView,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinishResponse {
    pub session_id: Uuid,
    #[serde(flatten)]
    pub scores: FinalScores,
    pub record_path: PathBuf,
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, SessionError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "body".to_string() } else { path };
        SessionError::validation(field, e.into_inner().to_string())
    })
}

impl IntoResponse for SessionError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self {
            SessionError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            SessionError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            SessionError::Validation { .. } => (StatusCode::BAD_REQUEST, "validation"),
            SessionError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let mut body = json!({ "error": { "kind": kind, "message": self.to_string() } });
        if let SessionError::Validation { field, .. } = &self {
            body["error"]["field"] = json!(field);
        }
        (status, Json(body)).into_response()
    }
}

type Shared = State<Arc<AppState>>;

async fn create_session(State(app): Shared, body: Bytes) -> Result<impl IntoResponse, SessionError> {
    let req: CreateSession = parse_body(&body)?;
    Ok((StatusCode::CREATED, Json(app.create(&req)?)))
}

async fn step_session(
    State(app): Shared,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, SessionError> {
    Ok(Json(app.step(&id, &body)?))
}

async fn get_session(State(app): Shared, Path(id): Path<String>) -> Result<impl IntoResponse, SessionError> {
    Ok(Json(app.view(&id)?))
}

async fn finish_session(State(app): Shared, Path(id): Path<String>) -> Result<impl IntoResponse, SessionError> {
    let app = app.clone();
    let res = tokio::task::spawn_blocking(move || app.finish(&id))
        .await
        .map_err(|e| SessionError::Internal(e.to_string()))??;
    Ok(Json(res))
}

/// `POST /sessions`, `POST /sessions/{id}/step`, `GET /sessions/{id}` and
/// `POST /sessions/{id}/finish`.
pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/step", post(step_session))
        .route("/sessions/{id}/finish", post(finish_session))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(state: Arc<AppState>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
