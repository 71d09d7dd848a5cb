//! HTTP/JSON API for interactive sessions driven by a human expert.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Error;
use crate::examples;
use crate::expert::{Answer, Label};
use crate::fpi::{Diagnosis, Fpi};
use crate::harness::QueryMode;
use crate::heuristics::{HeuristicId, HeuristicParams};
use crate::logic::AxiomId;
use crate::search::{SearchConfig, DEFAULT_NODE_BUDGET};
use crate::session::{Session, SessionConfig, Status, StepRecord, DEFAULT_LEADING_DIAGNOSES};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(3600);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub idle_timeout: Duration,
    /// Completed sessions are written here as JSON lines when set.
    pub persist_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { idle_timeout: DEFAULT_IDLE_TIMEOUT, persist_dir: None }
    }
}

struct Entry {
    session: Session,
    last_used: Instant,
}

type Shared = Arc<Mutex<Entry>>;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Shared>>>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState { sessions: Arc::default(), config: Arc::new(config) }
    }

    /// Drops sessions idle for longer than the configured timeout.
    pub fn evict_idle(&self) -> usize {
        let now = Instant::now();
        let mut map = self.sessions.lock().expect("session map lock");
        let before = map.len();
        map.retain(|_, e| {
            e.lock().map(|e| now.duration_since(e.last_used) < self.config.idle_timeout).unwrap_or(false)
        });
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, id: &str) -> Result<Shared, ApiError> {
        self.sessions.lock().expect("session map lock").get(id).cloned().ok_or(ApiError::NotFound)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answer", post(answer_session))
        .route("/kbs", get(list_kbs))
        .with_state(state)
}

/// Serves until ctrl-c, evicting idle sessions once a minute.
pub async fn serve(port: u16, config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::new(config);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.evict_idle();
        }
    });
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            tokio::signal::ctrl_c().await.ok();
        })
        .await
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String, Option<(usize, usize)>),
    NotFound,
    Conflict(String),
    Unprocessable(String),
    Internal(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => ApiError::BadRequest(p.to_string(), Some((p.line, p.column))),
            Error::NoViolation | Error::NoDiagnosis => ApiError::Unprocessable(e.to_string()),
            Error::InvalidAnswer(_) | Error::InvalidConfig(_) | Error::EmptyTestCase | Error::OverlappingAxiom(_) => {
                ApiError::BadRequest(e.to_string(), None)
            }
            Error::SessionFinished => ApiError::Conflict(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::BadRequest(msg, Some((line, column))) => {
                (StatusCode::BAD_REQUEST, json!({ "error": msg, "line": line, "column": column }))
            }
            ApiError::BadRequest(msg, None) => (StatusCode::BAD_REQUEST, json!({ "error": msg })),
            ApiError::NotFound => (StatusCode::NOT_FOUND, json!({ "error": "unknown session" })),
            ApiError::Conflict(msg) => (StatusCode::CONFLICT, json!({ "error": msg })),
            ApiError::Unprocessable(msg) => (StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": msg })),
            ApiError::Internal(msg) => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": msg })),
        };
        (status, Json(body)).into_response()
    }
}

fn default_expert_type() -> String {
    "interactive".into()
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CreateSession {
    pub kb_text: Option<String>,
    pub kb_id: Option<String>,
    pub mode: QueryMode,
    pub heuristic: HeuristicId,
    #[serde(default = "default_expert_type")]
    pub expert_type: String,
    #[serde(default)]
    pub seed: u64,
    pub leading_diagnoses: Option<usize>,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AxiomLabel {
    pub axiom_id: AxiomId,
    pub label: Label,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnswerBody {
    pub step: usize,
    pub per_axiom: Option<Vec<AxiomLabel>>,
    pub whole_query: Option<Label>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderedAxiom {
    pub axiom_id: AxiomId,
    pub rendering: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderedDiagnosis {
    pub axiom_ids: Diagnosis,
    pub rendering: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CurrentQuery {
    /// The `step` an answer to this query must carry.
    pub step: usize,
    pub axioms: Vec<RenderedAxiom>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Metrics {
    pub num_queries: usize,
    pub num_axioms: usize,
    pub num_axioms_classified: usize,
    pub total_time_ms: f64,
    #[serde(rename = "generatedQPs")]
    pub generated_qps: usize,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionResource {
    pub id: String,
    pub step: usize,
    pub status: &'static str,
    pub mode: QueryMode,
    pub heuristic: HeuristicId,
    pub initial_diagnoses_count: usize,
    pub remaining_diagnoses_count: usize,
    pub diagnoses: Vec<RenderedDiagnosis>,
    pub current_query: Option<CurrentQuery>,
    pub qpartition_sizes: Option<[usize; 2]>,
    pub final_diagnosis: Option<RenderedDiagnosis>,
    pub failure_reason: Option<String>,
    pub metrics_so_far: Metrics,
    pub history: Vec<StepRecord>,
}

fn render_ids(fpi: &Fpi, ids: impl IntoIterator<Item = AxiomId>) -> Vec<String> {
    ids.into_iter().map(|id| fpi.axiom(id).map(|ax| ax.to_string()).unwrap_or_default()).collect()
}

fn resource(id: &str, s: &Session) -> SessionResource {
    let fpi = s.fpi();
    let render = |d: &Diagnosis| RenderedDiagnosis {
        axiom_ids: d.clone(),
        rendering: render_ids(fpi, d.iter()),
        probability: s.distribution().p(d),
    };
    let (status, final_diagnosis, failure_reason) = match s.status() {
        Status::Running => ("running", None, None),
        Status::Done { final_diagnosis } => ("done", Some(render(final_diagnosis)), None),
        Status::Failed { reason } => ("failed", None, Some(reason.clone())),
    };
    let records = s.records();
    SessionResource {
        id: id.to_string(),
        step: records.len(),
        status,
        mode: if s.config().search.singleton { QueryMode::Singleton } else { QueryMode::Normal },
        heuristic: s.config().search.heuristic,
        initial_diagnoses_count: s.initial_diagnoses(),
        remaining_diagnoses_count: s.diagnoses().len(),
        diagnoses: s.diagnoses().iter().map(render).collect(),
        current_query: s.pending().map(|p| CurrentQuery {
            step: p.step,
            axioms: p
                .query
                .iter()
                .map(|&axiom_id| RenderedAxiom {
                    axiom_id,
                    rendering: fpi.axiom(axiom_id).map(|ax| ax.to_string()).unwrap_or_default(),
                })
                .collect(),
        }),
        qpartition_sizes: s.pending().map(|p| p.partition.sizes()),
        final_diagnosis,
        failure_reason,
        metrics_so_far: Metrics {
            num_queries: records.len(),
            num_axioms: records.iter().map(|r| r.axioms_inspected).sum(),
            num_axioms_classified: records.iter().map(|r| r.axioms_classified).sum(),
            total_time_ms: records.iter().map(|r| r.time_per_query_ms).sum(),
            generated_qps: records.iter().map(|r| r.generated_qps).sum(),
        },
        history: records.to_vec(),
    }
}

fn session_config(req: &CreateSession) -> Result<SessionConfig, ApiError> {
    if req.expert_type != "interactive" {
        return Err(ApiError::BadRequest(
            format!("expertType must be `interactive`, got `{}`", req.expert_type),
            None,
        ));
    }
    let d = HeuristicParams::default();
    let params = HeuristicParams { cautiousness: req.c.unwrap_or(d.cautiousness), epsilon: req.epsilon.unwrap_or(d.epsilon) };
    let search = SearchConfig {
        heuristic: req.heuristic,
        params,
        singleton: req.mode.is_singleton(),
        seed: req.seed,
        node_budget: DEFAULT_NODE_BUDGET,
    };
    let mut config = SessionConfig::new(search, None, req.seed);
    config.leading_diagnoses = req.leading_diagnoses.unwrap_or(DEFAULT_LEADING_DIAGNOSES);
    config.validate()?;
    Ok(config)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn create_session(
    State(state): State<AppState>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<SessionResource>), ApiError> {
    let text = match (&req.kb_text, &req.kb_id) {
        (Some(text), None) => text.clone(),
        (None, Some(id)) => examples::find(id)
            .ok_or_else(|| ApiError::BadRequest(format!("unknown kbId `{id}`"), None))?
            .text
            .to_string(),
        _ => return Err(ApiError::BadRequest("give exactly one of kbText and kbId".into(), None)),
    };
    let config = session_config(&req)?;
    let session = blocking(move || Ok(Session::start(Fpi::parse(&text)?, config)?)).await?;
    let id = format!("{:032x}", rand::thread_rng().gen::<u128>());
    let body = resource(&id, &session);
    let entry = Arc::new(Mutex::new(Entry { session, last_used: Instant::now() }));
    state.persist_if_done(&id, &entry);
    state.sessions.lock().expect("session map lock").insert(id, entry);
    Ok((StatusCode::CREATED, Json(body)))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionResource>, ApiError> {
    let entry = state.get(&id)?;
    let mut e = entry.lock().expect("session lock");
    e.last_used = Instant::now();
    Ok(Json(resource(&id, &e.session)))
}

fn answer_from_body(query: &[AxiomId], body: &AnswerBody) -> Result<Answer, ApiError> {
    match (&body.per_axiom, body.whole_query) {
        (Some(labels), None) => {
            let labels: Vec<(AxiomId, Label)> = labels.iter().map(|l| (l.axiom_id, l.label)).collect();
            Ok(Answer::from_labels(query, &labels)?)
        }
        (None, Some(label)) => Ok(Answer::whole(query, label)),
        _ => Err(ApiError::BadRequest("give exactly one of perAxiom and wholeQuery".into(), None)),
    }
}

async fn answer_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<AnswerBody>,
) -> Result<Json<SessionResource>, ApiError> {
    let entry = state.get(&id)?;
    let worker = entry.clone();
    let key = id.clone();
    let res = blocking(move || {
        let mut e = worker.lock().expect("session lock");
        e.last_used = Instant::now();
        let Some(pending) = e.session.pending() else {
            return Err(ApiError::Conflict("the session is not awaiting an answer".into()));
        };
        if body.step != pending.step {
            return Err(ApiError::Conflict(format!("answer for step {}, current step is {}", body.step, pending.step)));
        }
        let answer = answer_from_body(&pending.query, &body)?;
        e.session.submit(answer)?;
        Ok(resource(&key, &e.session))
    })
    .await?;
    state.persist_if_done(&id, &entry);
    Ok(Json(res))
}

impl AppState {
    fn persist_if_done(&self, id: &str, entry: &Shared) {
        let Some(dir) = &self.config.persist_dir else { return };
        let e = entry.lock().expect("session lock");
        if e.session.is_running() {
            return;
        }
        let write = || -> crate::error::Result<()> {
            std::fs::create_dir_all(dir)?;
            let mut file = std::fs::File::create(dir.join(format!("{id}.jsonl")))?;
            e.session.write_log(&mut file)
        };
        if let Err(err) = write() {
            eprintln!("could not persist session {id}: {err}");
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct CatalogEntry {
    id: &'static str,
    name: &'static str,
    kb_text: &'static str,
}

async fn list_kbs() -> Json<Vec<CatalogEntry>> {
    Json(examples::catalog().into_iter().map(|kb| CatalogEntry { id: kb.id, name: kb.name, kb_text: kb.text }).collect())
}
