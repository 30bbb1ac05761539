//! HTTP search service.
//!
//! Holds one immutable corpus database and answers encoded queries with
//! position-only metadata. Request bodies are never logged or written to
//! disk; log lines carry the route, status, sizes and timings only.

use std::collections::HashMap;
use std::io::{Cursor, Read};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use crate::corpus_db::CorpusDb;
use crate::detector::{self, DetectorConfig};
use crate::encoder::{parse_fasta, Alphabet, FastaError};
use crate::metadata::{PairwiseMetadata, ResultMetadata};

pub const DEFAULT_MAX_SEARCH_BODY: usize = 16 * 1024 * 1024;
pub const DEFAULT_MAX_ZIP_BODY: usize = 128 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub detector: DetectorConfig,
    pub max_search_body: usize,
    pub max_zip_body: usize,
    /// Requests still running after this long are answered with 202 and a
    /// job id. `None` keeps every request synchronous.
    pub async_after: Option<Duration>,
    /// Attach retained reference plaintext to matches.
    pub snippets: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            detector: DetectorConfig::default(),
            max_search_body: DEFAULT_MAX_SEARCH_BODY,
            max_zip_body: DEFAULT_MAX_ZIP_BODY,
            async_after: None,
            snippets: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Search,
    Pairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct JobRecord {
    pub job_id: String,
    pub kind: JobKind,
    pub state: JobState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result_metadata: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl JobRecord {
    /// Moves to `next` if that is a legal transition.
    fn advance(&mut self, next: JobState) -> bool {
        let ok = matches!(
            (self.state, next),
            (JobState::Queued, JobState::Running)
                | (JobState::Running, JobState::Done)
                | (JobState::Running, JobState::Failed)
        );
        if ok {
            self.state = next;
        }
        ok
    }
}

/// Shared server state.
pub struct AppState {
    db: RwLock<Option<Arc<CorpusDb>>>,
    config: ServiceConfig,
    jobs: Mutex<HashMap<String, JobRecord>>,
    next_job: AtomicU64,
}

impl AppState {
    pub fn new(db: Option<CorpusDb>, config: ServiceConfig) -> Arc<Self> {
        Arc::new(Self {
            db: RwLock::new(db.map(Arc::new)),
            config,
            jobs: Mutex::new(HashMap::new()),
            next_job: AtomicU64::new(1),
        })
    }

    pub fn load(&self, db: CorpusDb) {
        *self.db.write().unwrap() = Some(Arc::new(db));
    }

    fn db(&self) -> Option<Arc<CorpusDb>> {
        self.db.read().unwrap().clone()
    }
}

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("no database loaded")]
    NoDatabase,
    #[error("malformed FASTA: {0}")]
    Fasta(FastaError),
    #[error("expected exactly one sequence, got {0}")]
    SequenceCount(usize),
    #[error("bad zip archive: {0}")]
    Zip(String),
    #[error("pairwise comparison needs at least 2 documents, got {0}")]
    TooFewDocuments(usize),
    #[error("unknown job {0}")]
    UnknownJob(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self {
            Self::NoDatabase => StatusCode::SERVICE_UNAVAILABLE,
            Self::UnknownJob(_) => StatusCode::NOT_FOUND,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let search_limit = state.config.max_search_body;
    let zip_limit = state.config.max_zip_body;
    Router::new()
        .route(
            "/api/v1/search",
            post(search).layer(DefaultBodyLimit::max(search_limit)),
        )
        .route(
            "/api/v1/pairwise",
            post(pairwise).layer(DefaultBodyLimit::max(zip_limit)),
        )
        .route("/api/v1/info", get(info))
        .route("/api/v1/jobs/{id}", get(job))
        .with_state(state)
}

/// Parses a single-record FASTA body into a validated sequence.
fn parse_query(body: &[u8], alphabet: &Alphabet) -> Result<(String, Vec<u8>), ApiError> {
    let records = parse_fasta(body).map_err(ApiError::Fasta)?;
    if records.len() != 1 {
        return Err(ApiError::SequenceCount(records.len()));
    }
    let record = records.into_iter().next().unwrap();
    record.validate(alphabet).map_err(ApiError::Fasta)?;
    Ok((record.description, record.sequence))
}

/// Every file in the archive as one document named after its entry.
fn parse_batch(body: &[u8], alphabet: &Alphabet) -> Result<Vec<(String, Vec<u8>)>, ApiError> {
    let mut archive = zip::ZipArchive::new(Cursor::new(body)).map_err(|e| ApiError::Zip(e.to_string()))?;
    let mut docs = Vec::new();
    for i in 0..archive.len() {
        let mut entry = archive.by_index(i).map_err(|e| ApiError::Zip(e.to_string()))?;
        if entry.is_dir() {
            continue;
        }
        let name = entry.name().to_string();
        let mut bytes = Vec::new();
        entry
            .read_to_end(&mut bytes)
            .map_err(|e| ApiError::Zip(format!("{name}: {e}")))?;
        let (_, seq) = parse_query(&bytes, alphabet).map_err(|e| match e {
            ApiError::Fasta(f) => ApiError::Zip(format!("{name}: {f}")),
            ApiError::SequenceCount(n) => ApiError::Zip(format!("{name}: expected one sequence, got {n}")),
            other => other,
        })?;
        docs.push((name, seq));
    }
    Ok(docs)
}

fn run_search(db: &CorpusDb, config: &ServiceConfig, id: String, seq: &[u8]) -> Result<serde_json::Value, ApiError> {
    let report = detector::detect(db, id, seq, &config.detector).map_err(|e| ApiError::Internal(e.to_string()))?;
    let meta = ResultMetadata::from_report(&report, db, config.snippets);
    serde_json::to_value(meta).map_err(|e| ApiError::Internal(e.to_string()))
}

fn run_pairwise(
    docs: Vec<(String, Vec<u8>)>,
    alphabet: &Alphabet,
    config: &ServiceConfig,
) -> Result<serde_json::Value, ApiError> {
    let names: Vec<String> = docs.iter().map(|d| d.0.clone()).collect();
    let reports = detector::pairwise(&docs, alphabet, &config.detector).map_err(|e| match e {
        detector::DetectError::TooFewDocuments(n) => ApiError::TooFewDocuments(n),
        other => ApiError::Internal(other.to_string()),
    })?;
    let results = reports
        .iter()
        .map(|r| ResultMetadata::from_pairwise(r, &names))
        .collect();
    serde_json::to_value(PairwiseMetadata { results }).map_err(|e| ApiError::Internal(e.to_string()))
}

/// Runs `work` off the async threads. In async mode, answers 202 with a job
/// id if the work outlives the configured threshold.
async fn dispatch(
    state: Arc<AppState>,
    kind: JobKind,
    work: impl FnOnce() -> Result<serde_json::Value, ApiError> + Send + 'static,
) -> Result<Response, ApiError> {
    let Some(after) = state.config.async_after else {
        let value = tokio::task::spawn_blocking(work)
            .await
            .map_err(|e| ApiError::Internal(e.to_string()))??;
        return Ok(Json(value).into_response());
    };

    let job_id = format!("job-{}", state.next_job.fetch_add(1, Ordering::Relaxed));
    // Registered before the worker starts so its outcome can never miss the record.
    let mut record = JobRecord {
        job_id: job_id.clone(),
        kind,
        state: JobState::Queued,
        result_metadata: None,
        error: None,
    };
    record.advance(JobState::Running);
    state.jobs.lock().unwrap().insert(job_id.clone(), record);

    let (tx, mut rx) = oneshot::channel();
    let worker_state = state.clone();
    let worker_id = job_id.clone();
    tokio::task::spawn_blocking(move || {
        let outcome = work();
        if let Some(job) = worker_state.jobs.lock().unwrap().get_mut(&worker_id) {
            match &outcome {
                Ok(v) => {
                    job.advance(JobState::Done);
                    job.result_metadata = Some(v.clone());
                }
                Err(e) => {
                    job.advance(JobState::Failed);
                    job.error = Some(e.to_string());
                }
            }
        }
        let _ = tx.send(outcome);
    });

    match tokio::time::timeout(after, &mut rx).await {
        Ok(outcome) => {
            // Answered inline; the client never learns the id.
            state.jobs.lock().unwrap().remove(&job_id);
            let value = outcome.map_err(|e| ApiError::Internal(e.to_string()))??;
            Ok(Json(value).into_response())
        }
        Err(_) => {
            tracing::info!(job = %job_id, "request moved to background job");
            Ok((StatusCode::ACCEPTED, Json(json!({ "jobId": job_id, "state": "running" }))).into_response())
        }
    }
}

fn log_outcome(route: &str, started: Instant, bytes: usize, result: &Result<Response, ApiError>) {
    let status = match result {
        Ok(r) => r.status(),
        Err(e) => e.status(),
    };
    tracing::info!(
        route,
        status = status.as_u16(),
        body_bytes = bytes,
        elapsed_ms = started.elapsed().as_millis() as u64,
        "request"
    );
}

async fn search(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let started = Instant::now();
    let len = body.len();
    let result = async {
        let db = state.db().ok_or(ApiError::NoDatabase)?;
        let (id, seq) = parse_query(&body, db.alphabet())?;
        drop(body);
        let config = state.config.clone();
        dispatch(state.clone(), JobKind::Search, move || run_search(&db, &config, id, &seq)).await
    }
    .await;
    log_outcome("search", started, len, &result);
    result
}

async fn pairwise(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let started = Instant::now();
    let len = body.len();
    let result = async {
        // A loaded database fixes the alphabet; otherwise the configured default.
        let alphabet = state
            .db()
            .map(|db| db.alphabet().clone())
            .unwrap_or_default();
        let docs = parse_batch(&body, &alphabet)?;
        drop(body);
        if docs.len() < 2 {
            return Err(ApiError::TooFewDocuments(docs.len()));
        }
        let config = state.config.clone();
        dispatch(state.clone(), JobKind::Pairwise, move || run_pairwise(docs, &alphabet, &config)).await
    }
    .await;
    log_outcome("pairwise", started, len, &result);
    result
}

async fn info(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let db = state.db().ok_or(ApiError::NoDatabase)?;
    let d = &state.config.detector;
    Ok(Json(json!({
        "documentCount": db.document_count(),
        "totalWordCount": db.total_words(),
        "alphabetSize": db.alphabet().size(),
        "seedK": d.seed_k,
        "minReport": d.min_report,
        "maxGap": d.max_gap,
    }))
    .into_response())
}

async fn job(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let jobs = state.jobs.lock().unwrap();
    let record = jobs.get(&id).ok_or_else(|| ApiError::UnknownJob(id.clone()))?;
    Ok(Json(record.clone()).into_response())
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

/// A server running on its own runtime thread; stops when dropped.
pub struct BackgroundServer {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl BackgroundServer {
    pub fn start(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<Self> {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()?;
        let listener = runtime.block_on(TcpListener::bind(addr))?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let _ = serve(listener, state, async {
                    let _ = stopped.await;
                })
                .await;
            });
        });
        Ok(Self {
            addr,
            stop: Some(stop),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
