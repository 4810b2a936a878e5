//! HTTP/JSON front end for interactive sessions.
//!
//! Every question carries a `question_index` that the answer must echo, so a
//! repeated submission is rejected with 409 instead of being applied twice.
//! Sessions idle longer than the TTL are closed as if the user had quit; the
//! result is still returned on the next request.

pub mod registry;
pub mod wire;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fhdr_core::session::SessionError;
use fhdr_core::{Answer, Session, SessionConfig};
use thiserror::Error;
use uuid::Uuid;

pub use registry::{DatasetEntry, DatasetInfo, Registry};
use wire::{
    AnswerRequest, CreateRequest, CreateResponse, ErrorBody, Next, WireQuestion, WireResult,
};

pub const DEFAULT_TTL: Duration = Duration::from_secs(3600);

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("unknown session")]
    UnknownSession,
    #[error("answer is for question {got} but the pending question is {current}")]
    Stale { got: usize, current: usize },
    #[error("session is finished")]
    Finished,
    #[error("session is not finished")]
    NotFinished,
    #[error("{0}")]
    Unprocessable(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownDataset(_) | ApiError::UnknownSession => StatusCode::NOT_FOUND,
            ApiError::Stale { .. } | ApiError::Finished | ApiError::NotFinished => {
                StatusCode::CONFLICT
            }
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Config(_)
            | SessionError::BadChoice { .. }
            | SessionError::NotAllowed(_) => ApiError::Unprocessable(e.to_string()),
            SessionError::Terminal => ApiError::Finished,
            SessionError::NotFinished => ApiError::NotFinished,
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::Unprocessable(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if let ApiError::Internal(msg) = &self {
            log::error!("{msg}");
        }
        (
            self.status(),
            Json(ErrorBody {
                error: self.to_string(),
            }),
        )
            .into_response()
    }
}

struct Live {
    session: Session,
    entry: Arc<DatasetEntry>,
    last_seen: Instant,
    expired: bool,
}

impl Live {
    /// Applies idle expiry, then marks the session as just used.
    fn touch(&mut self, ttl: Duration) -> Result<(), ApiError> {
        let now = Instant::now();
        if !self.session.is_terminal() && now.duration_since(self.last_seen) > ttl {
            self.session.submit_answer(Answer::Quit)?;
            self.expired = true;
        }
        self.last_seen = now;
        Ok(())
    }

    fn next(&self, id: Uuid) -> Result<Next, ApiError> {
        if self.session.is_terminal() {
            let r = self.session.result()?;
            Ok(Next::Result(WireResult::new(
                id,
                r,
                &self.entry,
                self.expired,
            )))
        } else {
            let q = self.session.current_question()?;
            Ok(Next::Question(WireQuestion::new(id, q, &self.entry)))
        }
    }
}

struct Inner {
    registry: Registry,
    sessions: Mutex<HashMap<Uuid, Arc<Mutex<Live>>>>,
    ttl: Duration,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(registry: Registry) -> Self {
        AppState::with_ttl(registry, DEFAULT_TTL)
    }

    pub fn with_ttl(registry: Registry, ttl: Duration) -> Self {
        AppState {
            inner: Arc::new(Inner {
                registry,
                sessions: Mutex::new(HashMap::new()),
                ttl,
            }),
        }
    }

    fn lookup(&self, id: &str) -> Result<(Uuid, Arc<Mutex<Live>>), ApiError> {
        let id = Uuid::parse_str(id).map_err(|_| ApiError::UnknownSession)?;
        let sessions = self
            .inner
            .sessions
            .lock()
            .map_err(|e| ApiError::Internal(e.to_string()))?;
        let live = sessions.get(&id).cloned().ok_or(ApiError::UnknownSession)?;
        Ok((id, live))
    }

    /// Runs `f` on the session off the async executor, one request at a time
    /// per session.
    async fn with_session<T, F>(&self, id: &str, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(Uuid, &mut Live) -> Result<T, ApiError> + Send + 'static,
    {
        let (id, live) = self.lookup(id)?;
        let ttl = self.inner.ttl;
        blocking(move || {
            let mut live = live.lock().map_err(|e| ApiError::Internal(e.to_string()))?;
            live.touch(ttl)?;
            f(id, &mut live)
        })
        .await
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn list_datasets(State(state): State<AppState>) -> Json<Vec<DatasetInfo>> {
    Json(state.inner.registry.list())
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<CreateResponse>), ApiError> {
    let Json(req) = body?;
    let entry = state
        .inner
        .registry
        .get(&req.dataset)
        .ok_or_else(|| ApiError::UnknownDataset(req.dataset.clone()))?;
    let base = SessionConfig {
        seed: Uuid::new_v4().as_u64_pair().0,
        ..Default::default()
    };
    let cfg = req.config.apply(base);
    let seed = cfg.seed;
    let id = Uuid::new_v4();
    let (live, next) = blocking(move || {
        let session = Session::new(entry.data.clone(), cfg)?;
        let live = Live {
            session,
            entry,
            last_seen: Instant::now(),
            expired: false,
        };
        let next = live.next(id)?;
        Ok((live, next))
    })
    .await?;
    state
        .inner
        .sessions
        .lock()
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .insert(id, Arc::new(Mutex::new(live)));
    log::info!("session {id} created on {:?} with seed {seed}", req.dataset);
    Ok((
        StatusCode::CREATED,
        Json(CreateResponse {
            session_id: id,
            seed,
            next,
        }),
    ))
}

async fn get_question(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Next>, ApiError> {
    state
        .with_session(&id, |id, live| live.next(id))
        .await
        .map(Json)
}

async fn post_answer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<AnswerRequest>, JsonRejection>,
) -> Result<Json<Next>, ApiError> {
    let Json(req) = body?;
    let answer = req.to_answer().map_err(ApiError::Unprocessable)?;
    state
        .with_session(&id, move |id, live| {
            if live.session.is_terminal() {
                return Err(ApiError::Finished);
            }
            let current = live.session.current_question()?.index;
            if req.question_index != current {
                return Err(ApiError::Stale {
                    got: req.question_index,
                    current,
                });
            }
            live.session.submit_answer(answer)?;
            live.next(id)
        })
        .await
        .map(Json)
}

async fn get_result(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<WireResult>, ApiError> {
    state
        .with_session(&id, |id, live| {
            let r = live.session.result()?;
            Ok(WireResult::new(id, r, &live.entry, live.expired))
        })
        .await
        .map(Json)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/datasets", get(list_datasets))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/question", get(get_question))
        .route("/sessions/{id}/answer", post(post_answer))
        .route("/sessions/{id}/result", get(get_result))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
