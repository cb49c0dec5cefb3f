//! JSON-over-HTTP front of the session engine.
//!
//! Each session lives behind its own lock, so requests for one session are
//! serialized while different sessions proceed independently. Sets are
//! loaded once per `(task, biased)` and shared read-only. Every accepted
//! command is appended to `<log_dir>/<session>.jsonl` before the response
//! goes out; a session missing from memory is replayed from its log.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gestalt_core::tasks::Task;
use gestalt_core::Label;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{EventLog, Shown};
use crate::session::{AnswerOutcome, ItemView, Phase, Report, TrialSession};
use crate::sets::TrialSets;

pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    })
}

struct Live {
    session: TrialSession,
    log: EventLog,
    persisted: usize,
}

impl Live {
    fn flush(&mut self) -> Result<()> {
        let events = &self.session.events()[self.persisted..];
        self.log.append(events)?;
        self.persisted += events.len();
        Ok(())
    }
}

pub struct AppState {
    data_root: PathBuf,
    log_dir: PathBuf,
    clock: Clock,
    sets: Mutex<HashMap<(String, bool), Arc<TrialSets>>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Live>>>>,
    counter: AtomicU64,
}

impl AppState {
    pub fn new(data_root: &Path, log_dir: &Path, clock: Clock) -> Arc<Self> {
        Arc::new(AppState {
            data_root: data_root.to_path_buf(),
            log_dir: log_dir.to_path_buf(),
            clock,
            sets: Mutex::new(HashMap::new()),
            sessions: Mutex::new(HashMap::new()),
            counter: AtomicU64::new(0),
        })
    }

    fn now(&self) -> u64 {
        (self.clock)()
    }

    fn sets(&self, task: &str, biased: bool) -> Result<Arc<TrialSets>> {
        let mut cache = self.sets.lock().expect("sets lock");
        if let Some(s) = cache.get(&(task.to_string(), biased)) {
            return Ok(s.clone());
        }
        let s = Arc::new(TrialSets::load(&self.data_root, task, biased)?);
        cache.insert((task.to_string(), biased), s.clone());
        Ok(s)
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.log_dir.join(format!("{id}.jsonl"))
    }

    fn fresh_id(&self) -> String {
        loop {
            let n = self.counter.fetch_add(1, Ordering::Relaxed);
            let id = format!("s{:x}-{n}", self.now());
            if !self.log_path(&id).exists() {
                return id;
            }
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Live>>> {
        let mut map = self.sessions.lock().expect("sessions lock");
        if let Some(live) = map.get(id) {
            return Ok(live.clone());
        }
        let valid = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        let path = self.log_path(id);
        if !valid || !path.is_file() {
            return Err(Error::UnknownSession(id.to_string()));
        }
        let session = TrialSession::replay(EventLog::read(&path)?)?;
        let live = Arc::new(Mutex::new(Live {
            persisted: session.events().len(),
            session,
            log: EventLog::open(&path)?,
        }));
        map.insert(id.to_string(), live.clone());
        Ok(live)
    }

    /// Run `op` on session `id` under its lock and persist what it logged.
    fn with_session<T>(&self, id: &str, op: impl FnOnce(&mut TrialSession, &Self) -> Result<T>) -> Result<T> {
        let live = self.session(id)?;
        let mut live = live.lock().expect("session lock");
        let out = op(&mut live.session, self)?;
        live.flush()?;
        Ok(out)
    }

    fn sets_for(&self, s: &TrialSession) -> Result<Arc<TrialSets>> {
        self.sets(s.task(), s.biased())
    }
}

impl IntoResponse for Error {
    fn into_response(self) -> Response {
        let status = match &self {
            Error::Protocol(_) | Error::SetExhausted { .. } => StatusCode::CONFLICT,
            Error::MissingDataset { .. } | Error::UnknownSession(_) => StatusCode::NOT_FOUND,
            Error::InvalidInput(_) => StatusCode::BAD_REQUEST,
            Error::Core(e) if matches!(e.category(), "invalid-input" | "unknown-name") => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = serde_json::json!({ "error": self.category(), "message": self.to_string() });
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateRequest {
    pub task: String,
    pub seed: u64,
    #[serde(default)]
    pub biased: bool,
    #[serde(default)]
    pub id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub task: String,
    pub biased: bool,
    pub phase: Phase,
    pub examples_seen: usize,
    pub item: Option<ItemView>,
}

impl SessionView {
    fn of(s: &TrialSession) -> Self {
        SessionView {
            id: s.id().to_string(),
            task: s.task().to_string(),
            biased: s.biased(),
            phase: s.phase(),
            examples_seen: s.examples_seen(),
            item: s.current_item(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhibitImage {
    pub url: String,
    pub round: u8,
}

/// Class 0 goes on the left, class 1 on the right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhibitView {
    pub class0: Vec<ExhibitImage>,
    pub class1: Vec<ExhibitImage>,
    pub examples_seen: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoreRequest {
    pub class: Label,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub item: u64,
    pub class: Label,
    #[serde(default)]
    pub response_ms: Option<u64>,
}

fn image_url(key: &str) -> String {
    format!("/images/{key}")
}

fn exhibit_image(round: u8, s: &Shown) -> ExhibitImage {
    ExhibitImage {
        url: image_url(&s.key),
        round,
    }
}

async fn create(State(app): State<Arc<AppState>>, Json(req): Json<CreateRequest>) -> Result<(StatusCode, Json<SessionView>)> {
    Task::from_name(&req.task)?;
    let id = match req.id {
        Some(id) if app.log_path(&id).exists() => {
            return Err(Error::InvalidInput(format!("session `{id}` already exists")))
        }
        Some(id) => id,
        None => app.fresh_id(),
    };
    let sets = app.sets(&req.task, req.biased)?;
    let session = TrialSession::create(&id, &sets, req.seed, req.biased, app.now())?;
    let view = SessionView::of(&session);
    let mut live = Live {
        log: EventLog::open(&app.log_path(&id))?,
        session,
        persisted: 0,
    };
    live.flush()?;
    app.sessions
        .lock()
        .expect("sessions lock")
        .insert(id, Arc::new(Mutex::new(live)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn show(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<SessionView>> {
    app.with_session(&id, |s, _| Ok(Json(SessionView::of(s))))
}

async fn exhibit(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<ExhibitView>> {
    app.with_session(&id, |s, _| {
        let column = |class: Label| {
            s.exhibits()
                .iter()
                .filter(|(_, x)| x.class == class)
                .map(|(r, x)| exhibit_image(*r, x))
                .collect()
        };
        Ok(Json(ExhibitView {
            class0: column(Label::Holds),
            class1: column(Label::Violated),
            examples_seen: s.examples_seen(),
        }))
    })
}

async fn more(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<MoreRequest>,
) -> Result<Json<serde_json::Value>> {
    app.with_session(&id, |s, app| {
        let sets = app.sets_for(s)?;
        let shown = s.more_examples(&sets, req.class, app.now())?;
        let Phase::Training { round } = s.phase() else {
            unreachable!("more examples keeps the training phase")
        };
        let items: Vec<ExhibitImage> = shown.iter().map(|x| exhibit_image(round, x)).collect();
        Ok(Json(serde_json::json!({ "items": items, "examples_seen": s.examples_seen() })))
    })
}

async fn begin_testing(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<ItemView>> {
    app.with_session(&id, |s, app| {
        let sets = app.sets_for(s)?;
        Ok(Json(s.begin_testing(&sets, app.now())?))
    })
}

async fn item(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<ItemView>> {
    app.with_session(&id, |s, _| {
        s.current_item()
            .map(Json)
            .ok_or_else(|| Error::Protocol(format!("no pending item in phase {:?}", s.phase())))
    })
}

async fn item_image(
    State(app): State<Arc<AppState>>,
    UrlPath((id, item)): UrlPath<(String, u64)>,
) -> Result<Response> {
    let key = app.with_session(&id, |s, _| Ok(s.pending_key(item)?.to_string()))?;
    png(&app.data_root, &key).await
}

async fn answer(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<AnswerRequest>,
) -> Result<Json<AnswerOutcome>> {
    app.with_session(&id, |s, app| {
        let sets = app.sets_for(s)?;
        Ok(Json(s.submit_answer(&sets, req.item, req.class, req.response_ms, app.now())?))
    })
}

async fn abandon(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<SessionView>> {
    app.with_session(&id, |s, app| {
        s.abandon(app.now())?;
        Ok(Json(SessionView::of(s)))
    })
}

async fn report(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<Report>> {
    app.with_session(&id, |s, _| Ok(Json(s.report())))
}

async fn image(State(app): State<Arc<AppState>>, UrlPath(key): UrlPath<String>) -> Result<Response> {
    png(&app.data_root, &key).await
}

async fn png(root: &Path, key: &str) -> Result<Response> {
    let rel = Path::new(key);
    let safe = rel.components().all(|c| matches!(c, Component::Normal(_)));
    if !safe || rel.extension().and_then(|e| e.to_str()) != Some("png") {
        return Err(Error::InvalidInput(format!("bad image path `{key}`")));
    }
    let path = root.join(rel);
    match tokio::fs::read(&path).await {
        Ok(bytes) => Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Ok((StatusCode::NOT_FOUND, format!("no image {key}")).into_response())
        }
        Err(e) => Err(Error::io(path, e)),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(show))
        .route("/api/sessions/{id}/exhibit", get(exhibit))
        .route("/api/sessions/{id}/more", post(more))
        .route("/api/sessions/{id}/begin-testing", post(begin_testing))
        .route("/api/sessions/{id}/item", get(item))
        .route("/api/sessions/{id}/items/{item}/image", get(item_image))
        .route("/api/sessions/{id}/answer", post(answer))
        .route("/api/sessions/{id}/abandon", post(abandon))
        .route("/api/sessions/{id}/report", get(report))
        .route("/images/{*key}", get(image))
        .with_state(state)
}

/// Serve until the process is stopped.
pub async fn serve(addr: SocketAddr, data_root: &Path, log_dir: &Path) -> Result<()> {
    let app = router(AppState::new(data_root, log_dir, system_clock()));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(format!("tcp://{addr}"), e))?;
    axum::serve(listener, app)
        .await
        .map_err(|e| Error::io(format!("tcp://{addr}"), e))
}
