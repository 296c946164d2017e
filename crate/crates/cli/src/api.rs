//! HTTP facade. Every handler reads the shared engine; nothing mutates it
//! after startup. Engine calls run on the blocking pool, and handlers that
//! may reach the chat backend first take a permit from a bounded semaphore.

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use legis_core::corpus::parse_draft;
use legis_core::graph::{EdgeKind, NodeRecord};
use legis_core::llm::LlmError;
use legis_core::metrics::ReadabilityProfile;
use legis_core::monitor::{
    degree_distribution, export_dataset, timeseries, Dataset, Direction, ExportFormat, Granularity, Metric,
};
use legis_core::pipeline::{Engine, LawFilter, PipelineError};
use legis_core::report::{Locale, ReportError};
use legis_core::vector::VectorError;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::CliError;

pub const API_VERSION: &str = "1";
pub const DEFAULT_PAGE_LIMIT: usize = 50;
pub const MAX_PAGE_LIMIT: usize = 500;

#[derive(Debug, Clone)]
pub struct ServeSettings {
    pub default_k: usize,
    pub locale: Locale,
    pub cors_origin: Option<String>,
    pub max_in_flight: usize,
}

impl Default for ServeSettings {
    fn default() -> Self {
        Self {
            default_k: legis_core::pipeline::DEFAULT_K,
            locale: Locale::default(),
            cors_origin: None,
            max_in_flight: 4,
        }
    }
}

#[derive(Clone)]
struct AppState {
    engine: Arc<Engine>,
    permits: Arc<Semaphore>,
    settings: Arc<ServeSettings>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}: {}", self.code, self.message);
        }
        (self.status, Json(json!({ "code": self.code, "message": self.message }))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Self::bad_request("invalid_body", r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        Self::bad_request("invalid_query", r.body_text())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let message = e.to_string();
        match e {
            PipelineError::EmptyInput => Self::bad_request("empty_input", message),
            PipelineError::EmptyTopics => Self::bad_request("empty_topics", message),
            PipelineError::InvalidK => Self::bad_request("invalid_k", message),
            PipelineError::Corpus(_) => Self::bad_request("invalid_draft", message),
            PipelineError::Metrics(_) => Self::bad_request("no_profile", message),
            PipelineError::Report(ReportError::EmptyComparisonSet) => {
                Self::bad_request("empty_comparison_set", message)
            }
            PipelineError::UnknownLaw(_) => Self::new(StatusCode::NOT_FOUND, "unknown_law", message),
            PipelineError::Llm(
                LlmError::BackendUnavailable { .. } | LlmError::Timeout { .. } | LlmError::InvalidResponse(_),
            )
            | PipelineError::Vector(VectorError::BackendUnavailable(_)) => {
                Self::new(StatusCode::SERVICE_UNAVAILABLE, "gateway_unavailable", message)
            }
            PipelineError::Vector(VectorError::EmptyText) => Self::bad_request("empty_input", message),
            _ => Self::internal(message),
        }
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn today() -> NaiveDate {
    chrono::Utc::now().date_naive()
}

fn parse_param<T>(name: &str, value: Option<&str>, default: Option<T>) -> Result<T, ApiError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    match value.filter(|v| !v.is_empty()) {
        Some(v) => v
            .parse()
            .map_err(|e: T::Err| ApiError::bad_request("invalid_query", format!("{name}: {e}"))),
        None => default.ok_or_else(|| ApiError::bad_request("invalid_query", format!("missing parameter {name}"))),
    }
}

pub fn router(engine: Arc<Engine>, settings: ServeSettings) -> Router {
    let cors = match &settings.cors_origin {
        Some(origin) => match HeaderValue::from_str(origin) {
            Ok(v) => CorsLayer::new().allow_origin(AllowOrigin::list([v])),
            Err(_) => {
                log::warn!("ignoring invalid CORS origin {origin:?}");
                CorsLayer::new()
            }
        },
        None => CorsLayer::new().allow_origin(Any),
    }
    .allow_methods(Any)
    .allow_headers(Any)
    .expose_headers([header::HeaderName::from_static("x-api-version")]);

    let state = AppState {
        engine,
        permits: Arc::new(Semaphore::new(settings.max_in_flight.max(1))),
        settings: Arc::new(settings),
    };
    Router::new()
        .route("/api/laws", get(list_laws))
        .route("/api/laws/{id}", get(get_law))
        .route("/api/laws/{id}/report", post(law_report))
        .route("/api/drafts/analyze", post(analyze_draft))
        .route("/api/landscape", post(landscape))
        .route("/api/monitor/timeseries", get(monitor_timeseries))
        .route("/api/monitor/degree", get(monitor_degree))
        .route("/healthz", get(healthz))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .layer(axum::middleware::map_response(version_header))
        .layer(cors)
        .with_state(state)
}

async fn version_header(mut response: Response) -> Response {
    response
        .headers_mut()
        .insert("x-api-version", HeaderValue::from_static(API_VERSION));
    response
}

pub async fn serve(engine: Engine, settings: ServeSettings, host: &str, port: u16) -> Result<(), CliError> {
    let app = router(Arc::new(engine), settings);
    let listener = tokio::net::TcpListener::bind((host, port))
        .await
        .map_err(|e| CliError::Io(format!("cannot bind {host}:{port}: {e}")))?;
    let addr = listener.local_addr().map_err(|e| CliError::Io(e.to_string()))?;
    log::info!("listening on http://{addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        })
        .await
        .map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Serialize)]
struct LawSummary {
    law_id: String,
    title: Option<String>,
    publication_date: Option<NaiveDate>,
    ministry_domain: Option<String>,
    article_count: usize,
}

fn summary(engine: &Engine, law: &NodeRecord) -> LawSummary {
    LawSummary {
        law_id: law.node_id.clone(),
        title: law.properties.title.clone(),
        publication_date: law.properties.publication_date,
        ministry_domain: law.properties.ministry_domain.clone(),
        article_count: engine.graph().articles_of(&law.node_id).len(),
    }
}

#[derive(Debug, Deserialize)]
struct LawsQuery {
    year: Option<i32>,
    domain: Option<String>,
    q: Option<String>,
    limit: Option<usize>,
    offset: Option<usize>,
}

async fn list_laws(
    State(state): State<AppState>,
    query: Result<Query<LawsQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(query) = query?;
    let limit = query.limit.unwrap_or(DEFAULT_PAGE_LIMIT);
    if limit == 0 || limit > MAX_PAGE_LIMIT {
        return Err(ApiError::bad_request(
            "invalid_query",
            format!("limit must be between 1 and {MAX_PAGE_LIMIT}"),
        ));
    }
    let offset = query.offset.unwrap_or(0);
    let filter = LawFilter {
        year: query.year,
        domain: query.domain.filter(|d| !d.is_empty()),
        ids: None,
        q: query.q.filter(|q| !q.is_empty()),
    };
    let engine = &state.engine;
    let matching: Vec<&NodeRecord> = engine.select_laws(&filter).collect();
    let items: Vec<LawSummary> = matching
        .iter()
        .skip(offset)
        .take(limit)
        .map(|l| summary(engine, l))
        .collect();
    Ok(Json(json!({ "total": matching.len(), "limit": limit, "offset": offset, "items": items })).into_response())
}

/// Accepts ids with or without the leading slash.
fn resolve_law(engine: &Engine, raw: &str) -> Result<String, ApiError> {
    let candidates = [raw.to_string(), format!("/{raw}")];
    candidates
        .into_iter()
        .find(|id| engine.graph().node(id).is_some_and(|n| n.is_law() && !n.is_stub()))
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_law", format!("unknown law {raw}")))
}

#[derive(Debug, Serialize)]
struct Abrogator {
    law_id: String,
    effective_date: Option<NaiveDate>,
}

async fn get_law(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let engine = &state.engine;
    let id = resolve_law(engine, &id)?;
    let law = engine.graph().node(&id).expect("resolved law exists");
    let (profile, profile_error): (Option<&ReadabilityProfile>, Option<String>) = match engine.law_profile(&id) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let preamble: Vec<String> = engine
        .graph()
        .outgoing_refs(&id, Some(legis_core::corpus::RefKind::Preamble))
        .map(|refs| refs.into_iter().map(|e| e.dst).collect())
        .unwrap_or_default();
    let abrogated_by: Vec<Abrogator> = engine
        .graph()
        .edges()
        .filter(|e| e.kind == EdgeKind::Abrogates && e.dst == id)
        .map(|e| Abrogator {
            law_id: e.src,
            effective_date: e.properties.effective_date,
        })
        .collect();
    Ok(Json(json!({
        "law": summary(engine, law),
        "profile": profile,
        "profile_error": profile_error,
        "preamble_citations": preamble,
        "abrogated_by": abrogated_by,
    }))
    .into_response())
}

#[derive(Debug, Default, Deserialize)]
struct ReportRequest {
    #[serde(default)]
    comparison: LawFilter,
    locale: Option<Locale>,
}

async fn law_report(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ReportRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(request) = body?;
    let id = resolve_law(&state.engine, &id)?;
    let locale = request.locale.unwrap_or(state.settings.locale);
    let permit = state
        .permits
        .clone()
        .acquire_owned()
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let engine = state.engine.clone();
    let report = blocking(move || {
        let _permit = permit;
        engine
            .law_report(&id, &request.comparison, locale)
            .map_err(ApiError::from)
    })
    .await?;
    Ok(Json(report).into_response())
}

#[derive(Debug, Deserialize)]
struct DraftRequest {
    #[serde(default)]
    title: String,
    #[serde(default)]
    text: String,
    draft_id: Option<String>,
    proponent: Option<String>,
    as_of: Option<NaiveDate>,
    k: Option<usize>,
}

async fn analyze_draft(
    State(state): State<AppState>,
    body: Result<Json<DraftRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(request) = body?;
    let mut metadata = std::collections::BTreeMap::new();
    metadata.insert("title".to_string(), request.title.clone());
    if let Some(id) = request.draft_id.filter(|i| !i.is_empty()) {
        metadata.insert("draft_id".to_string(), id);
    }
    if let Some(p) = request.proponent {
        metadata.insert("proponent".to_string(), p);
    }
    let draft =
        parse_draft(&request.text, &metadata).map_err(|e| ApiError::bad_request("invalid_draft", e.to_string()))?;
    let as_of = request.as_of.unwrap_or_else(today);
    let k = request.k.unwrap_or(state.settings.default_k);
    let permit = state
        .permits
        .clone()
        .acquire_owned()
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let engine = state.engine.clone();
    let report = blocking(move || {
        let _permit = permit;
        engine.analyze_draft(&draft, as_of, k).map_err(ApiError::from)
    })
    .await?;
    Ok(Json(report).into_response())
}

#[derive(Debug, Deserialize)]
struct LandscapeRequest {
    #[serde(default)]
    input: String,
    as_of: Option<NaiveDate>,
    k: Option<usize>,
}

async fn landscape(
    State(state): State<AppState>,
    body: Result<Json<LandscapeRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(request) = body?;
    if request.input.trim().is_empty() {
        return Err(PipelineError::EmptyInput.into());
    }
    let as_of = request.as_of.unwrap_or_else(today);
    let k = request.k.unwrap_or(state.settings.default_k);
    let permit = state
        .permits
        .clone()
        .acquire_owned()
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let engine = state.engine.clone();
    let result = blocking(move || {
        let _permit = permit;
        engine.landscape(&request.input, as_of, k).map_err(ApiError::from)
    })
    .await?;
    Ok(Json(result).into_response())
}

#[derive(Debug, Deserialize)]
struct SeriesQuery {
    metric: Option<String>,
    granularity: Option<String>,
    from: Option<String>,
    to: Option<String>,
    format: Option<String>,
}

fn dataset_response(bytes: Vec<u8>, format: ExportFormat) -> Response {
    ([(header::CONTENT_TYPE, format.content_type())], bytes).into_response()
}

async fn monitor_timeseries(
    State(state): State<AppState>,
    query: Result<Query<SeriesQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query?;
    let metric: Metric = parse_param("metric", q.metric.as_deref(), None)?;
    let granularity: Granularity = parse_param("granularity", q.granularity.as_deref(), Some(Granularity::Year))?;
    let format: ExportFormat = parse_param("format", q.format.as_deref(), Some(ExportFormat::Json))?;
    let dates: Vec<NaiveDate> = state
        .engine
        .graph()
        .ingested_laws()
        .filter_map(|l| l.properties.publication_date)
        .collect();
    let from: NaiveDate = parse_param("from", q.from.as_deref(), dates.iter().min().copied())?;
    let to: NaiveDate = parse_param("to", q.to.as_deref(), dates.iter().max().copied())?;
    let engine = state.engine.clone();
    let bytes = blocking(move || {
        let series = timeseries(engine.graph(), metric, granularity, from, to)
            .map_err(|e| ApiError::bad_request("invalid_range", e.to_string()))?;
        Ok(export_dataset(Dataset::Series(&series), format))
    })
    .await?;
    Ok(dataset_response(bytes, format))
}

#[derive(Debug, Deserialize)]
struct DegreeQuery {
    kind: Option<String>,
    direction: Option<String>,
    format: Option<String>,
}

async fn monitor_degree(
    State(state): State<AppState>,
    query: Result<Query<DegreeQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query?;
    let kind: EdgeKind = parse_param("kind", q.kind.as_deref(), Some(EdgeKind::Cites))?;
    let direction: Direction = parse_param("direction", q.direction.as_deref(), Some(Direction::In))?;
    let format: ExportFormat = parse_param("format", q.format.as_deref(), Some(ExportFormat::Json))?;
    let engine = state.engine.clone();
    let bytes = blocking(move || {
        let histogram = degree_distribution(engine.graph(), kind, direction);
        Ok(export_dataset(Dataset::Histogram(&histogram), format))
    })
    .await?;
    Ok(dataset_response(bytes, format))
}

async fn healthz(State(state): State<AppState>) -> Json<serde_json::Value> {
    let engine = &state.engine;
    Json(json!({
        "status": "ok",
        "snapshot_loaded": true,
        "index_loaded": engine.index().is_frozen(),
        "llm_mode": engine.gateway().backend_name(),
        "laws": engine.graph().ingested_laws().count(),
        "indexed": engine.index().len(),
        "api_version": API_VERSION,
    }))
}
