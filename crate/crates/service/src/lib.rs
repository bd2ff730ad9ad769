//! HTTP JSON API over one loaded agile map.
//!
//! The map is loaded once and shared read-only by every handler; selections
//! travel in request bodies, so the server keeps no session state.
//!
//! | Method | Path                        | Answer                          |
//! |--------|-----------------------------|---------------------------------|
//! | GET    | `/api/map`                  | JSON graph (with `ETag`)        |
//! | GET    | `/api/practices?objective=` | practices, optionally filtered  |
//! | POST   | `/api/selection/validate`   | selection report                |
//! | POST   | `/api/selection/substitute` | new `chosen` list               |
//! | POST   | `/api/plan`                 | composition plan                |

mod error;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{RawQuery, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use agilemap_core::io::export_json_graph;
use agilemap_core::{
    compose_plan, select_by_objectives, substitute, validate_selection, AgileMap, AgilePractice, CompositionPlan,
    ObjectiveTag, PracticeId, Selection, SelectionReport,
};

pub use error::{ApiError, ErrorCode};

/// Immutable per-process state.
#[derive(Debug)]
pub struct AppState {
    map: AgileMap,
    map_json: String,
    etag: String,
}

impl AppState {
    pub fn new(map: AgileMap) -> Self {
        let map_json = export_json_graph(&map);
        let digest = Sha256::digest(map_json.as_bytes());
        let etag = format!("\"{}\"", hex::encode(&digest[..16]));
        Self { map, map_json, etag }
    }

    pub fn map(&self) -> &AgileMap {
        &self.map
    }

    pub fn etag(&self) -> &str {
        &self.etag
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Directory with the built UI, served for every non-API path.
    pub ui_dir: Option<PathBuf>,
}

pub fn router(map: AgileMap) -> Router {
    router_with(map, ServiceConfig::default())
}

pub fn router_with(map: AgileMap, config: ServiceConfig) -> Router {
    let state = Arc::new(AppState::new(map));
    let api = Router::new()
        .route("/api/map", get(get_map))
        .route("/api/practices", get(get_practices))
        .route("/api/selection/validate", post(post_validate))
        .route("/api/selection/substitute", post(post_substitute))
        .route("/api/plan", post(post_plan))
        .with_state(state);
    let app = match config.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::new(ErrorCode::NotFound, "no such endpoint") }),
    };
    app.layer(CorsLayer::permissive())
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, app: Router) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "agile map service listening");
    }
    axum::serve(listener, app).await
}

type SharedState = State<Arc<AppState>>;

async fn get_map(State(state): SharedState, headers: HeaderMap) -> Response {
    let etag = HeaderValue::from_str(&state.etag).expect("hex etag is a valid header");
    let matches = headers
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|tag| tag.trim() == state.etag || tag.trim() == "*"));
    if matches {
        return (StatusCode::NOT_MODIFIED, [(header::ETAG, etag)]).into_response();
    }
    (
        StatusCode::OK,
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json")), (header::ETAG, etag)],
        state.map_json.clone(),
    )
        .into_response()
}

async fn get_practices(State(state): SharedState, RawQuery(query): RawQuery) -> Result<Json<Vec<AgilePractice>>, ApiError> {
    let mut objectives = BTreeSet::new();
    let mut filtered = false;
    for (key, value) in form_urlencoded::parse(query.unwrap_or_default().as_bytes()) {
        if key == "objective" {
            filtered = true;
            let tag: ObjectiveTag = value.parse().map_err(|_| {
                ApiError::new(ErrorCode::UnknownObjective, format!("unknown objective `{value}`: expected sp, po or ke"))
            })?;
            objectives.insert(tag);
        }
    }
    let practices = if filtered {
        let ids = select_by_objectives(&state.map, &objectives);
        state.map.practices().filter(|p| ids.contains(&p.id)).cloned().collect()
    } else {
        state.map.practices().filter(|p| !p.excluded).cloned().collect()
    };
    Ok(Json(practices))
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(ErrorCode::BadRequest, format!("malformed request body: {e}")))
}

/// Parses raw id strings against the map; malformed and unknown ids are
/// reported together, in request order.
fn resolve_ids<'a>(map: &AgileMap, raw: impl IntoIterator<Item = &'a String>) -> Result<Vec<PracticeId>, ApiError> {
    let mut ids = Vec::new();
    let mut offenders = Vec::new();
    for text in raw {
        match text.parse::<PracticeId>() {
            Ok(id) if map.contains(id) => ids.push(id),
            _ => offenders.push(text.clone()),
        }
    }
    if offenders.is_empty() {
        Ok(ids)
    } else {
        Err(ApiError::unknown_practices(offenders))
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SelectionBody {
    chosen: Vec<String>,
    #[serde(default)]
    include_excluded: bool,
}

impl SelectionBody {
    fn selection(&self, map: &AgileMap) -> Result<Selection, ApiError> {
        Ok(Selection { chosen: resolve_ids(map, &self.chosen)?.into_iter().collect(), include_excluded: self.include_excluded })
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SubstituteBody {
    chosen: Vec<String>,
    from: String,
    to: String,
    #[serde(default)]
    include_excluded: bool,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ChosenResponse {
    pub chosen: Vec<PracticeId>,
}

async fn post_validate(State(state): SharedState, body: Bytes) -> Result<Json<SelectionReport>, ApiError> {
    let sel = parse_body::<SelectionBody>(&body)?.selection(&state.map)?;
    Ok(Json(validate_selection(&state.map, &sel)?))
}

async fn post_substitute(State(state): SharedState, body: Bytes) -> Result<Json<ChosenResponse>, ApiError> {
    let req: SubstituteBody = parse_body(&body)?;
    let chosen = resolve_ids(&state.map, &req.chosen)?;
    let ends = resolve_ids(&state.map, [&req.from, &req.to])?;
    let sel = Selection { chosen: chosen.into_iter().collect(), include_excluded: req.include_excluded };
    let next = substitute(&state.map, &sel, ends[0], ends[1])?;
    Ok(Json(ChosenResponse { chosen: next.chosen.into_iter().collect() }))
}

async fn post_plan(State(state): SharedState, body: Bytes) -> Result<Json<CompositionPlan>, ApiError> {
    let sel = parse_body::<SelectionBody>(&body)?.selection(&state.map)?;
    Ok(Json(compose_plan(&state.map, &sel)?))
}
