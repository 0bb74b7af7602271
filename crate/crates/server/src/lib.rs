//! Read-only HTTP API over a catalog.
//!
//! Every route is served under `/api/v1` and, for clients that do not pin a
//! version, under `/api`:
//!
//! | method | path              | body                         |
//! |--------|-------------------|------------------------------|
//! | GET    | `/datasets`       | search result, `X-Total-Count` header |
//! | GET    | `/datasets/{id}`  | one catalog entry            |
//! | POST   | `/rag/query`      | `{"text": "...", "k": 10}` → ranked entries |
//! | GET    | `/stats`          | corpus statistics            |
//!
//! Errors are `{"status": 400, "code": "invalid_param", "message": "..."}`.
//!
//! Search parameters: `q`, `category`, `sub_category`, `country` (each of the
//! three repeatable), `year_from`, `year_to`, `limit`, `offset`. Unknown
//! parameters are rejected rather than ignored.

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{HeaderMap, HeaderName, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use tower_http::cors::{AllowOrigin, CorsLayer};

use litcat::catalog::{Catalog, CorpusStats, SearchQuery, MAX_LIMIT};
use litcat::harmonization::CatalogEntry;
use litcat::providers::ProviderError;

pub const TOTAL_COUNT: &str = "x-total-count";
pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{status} {code}: {message}")]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status: status.as_u16(), code: code.to_string(), message: message.into() }
    }

    fn bad(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

#[derive(Clone)]
pub struct AppState {
    pub catalog: Arc<Catalog>,
}

/// Which origins may call the API from a browser.
#[derive(Debug, Clone, Default)]
pub enum Cors {
    #[default]
    Any,
    Origins(Vec<String>),
}

pub fn router(catalog: Arc<Catalog>, cors: &Cors) -> Router {
    let api = Router::new()
        .route("/datasets", get(search))
        .route("/datasets/{id}", get(detail))
        .route("/rag/query", post(rag))
        .route("/stats", get(stats))
        .method_not_allowed_fallback(|| async { ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed") });
    let allow = match cors {
        Cors::Any => AllowOrigin::any(),
        Cors::Origins(list) => AllowOrigin::list(list.iter().filter_map(|o| HeaderValue::from_str(o).ok())),
    };
    let cors = CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([axum::http::header::CONTENT_TYPE])
        .expose_headers([HeaderName::from_static(TOTAL_COUNT)]);
    Router::new()
        .nest("/api/v1", api.clone())
        .nest("/api", api)
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .layer(cors)
        .with_state(AppState { catalog })
}

/// Serve until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ApiError> {
    value.trim().parse().map_err(|_| ApiError::bad("invalid_param", format!("{key}: cannot parse {value:?}")))
}

/// Query string to search query, strictly.
pub fn parse_search(raw: Option<&str>) -> Result<SearchQuery, ApiError> {
    let mut q = SearchQuery::default();
    for (key, value) in url::form_urlencoded::parse(raw.unwrap_or("").as_bytes()) {
        let v = value.trim();
        match key.as_ref() {
            "q" => q.keywords = Some(v.to_string()).filter(|s| !s.is_empty()),
            "category" if !v.is_empty() => {
                q.categories.insert(v.to_string());
            }
            "sub_category" if !v.is_empty() => {
                q.sub_categories.insert(v.to_string());
            }
            "country" if !v.is_empty() => {
                if v.len() != 2 || !v.chars().all(|c| c.is_ascii_alphabetic()) {
                    return Err(ApiError::bad("invalid_param", format!("country: expected a two-letter code, got {v:?}")));
                }
                q.countries.insert(v.to_ascii_uppercase());
            }
            "category" | "sub_category" | "country" => {}
            "year_from" => q.year_from = Some(parse_num(&key, v)?),
            "year_to" => q.year_to = Some(parse_num(&key, v)?),
            "limit" => q.limit = parse_num(&key, v)?,
            "offset" => q.offset = parse_num(&key, v)?,
            other => return Err(ApiError::bad("unknown_param", format!("unknown parameter {other:?}"))),
        }
    }
    q.validate().map_err(|e| ApiError::bad("invalid_param", e.to_string()))?;
    Ok(q)
}

async fn search(State(s): State<AppState>, RawQuery(raw): RawQuery) -> Result<Response, ApiError> {
    let q = parse_search(raw.as_deref())?;
    let result = s.catalog.search(&q).map_err(|e| ApiError::bad("invalid_param", e.to_string()))?;
    let mut headers = HeaderMap::new();
    headers.insert(TOTAL_COUNT, HeaderValue::from(result.total_matches));
    headers.insert("x-offset", HeaderValue::from(q.offset));
    headers.insert("x-limit", HeaderValue::from(q.limit));
    Ok((headers, Json(result)).into_response())
}

async fn detail(State(s): State<AppState>, Path(id): Path<String>) -> Result<Json<CatalogEntry>, ApiError> {
    s.catalog
        .get(&id)
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no dataset {id:?}")))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RagRequest {
    pub text: String,
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_k() -> usize {
    DEFAULT_K
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RagHit {
    pub entry_id: String,
    pub score: f64,
    pub entry: CatalogEntry,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RagResponse {
    pub results: Vec<RagHit>,
}

async fn rag(State(s): State<AppState>, body: Bytes) -> Result<Json<RagResponse>, ApiError> {
    let req: RagRequest = serde_json::from_slice(&body).map_err(|e| ApiError::bad("invalid_body", e.to_string()))?;
    if req.text.trim().is_empty() {
        return Err(ApiError::bad("invalid_body", "text is empty"));
    }
    if req.k == 0 || req.k > MAX_LIMIT {
        return Err(ApiError::bad("invalid_body", format!("k must be between 1 and {MAX_LIMIT}, got {}", req.k)));
    }
    let catalog = s.catalog.clone();
    // the embedding provider may block on the network
    let hits = tokio::task::spawn_blocking(move || catalog.rag_retrieve(&req.text, req.k))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(|e| match e {
            ProviderError::Precondition(m) => ApiError::bad("invalid_body", m),
            other => ApiError::new(StatusCode::BAD_GATEWAY, "provider_error", other.to_string()),
        })?;
    Ok(Json(RagResponse {
        results: hits.into_iter().map(|h| RagHit { entry_id: h.entry.entry_id.clone(), score: h.score, entry: h.entry }).collect(),
    }))
}

async fn stats(State(s): State<AppState>) -> Json<CorpusStats> {
    Json(CorpusStats::clone(&s.catalog.stats()))
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/api.md")]
mod book_api {}
