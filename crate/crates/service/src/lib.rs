//! Stateless JSON API over the design computations.
//!
//! Every compute endpoint takes a scenario document (the same keys as a CLI
//! config file) and answers with
//! `{schema_version, endpoint, inputs, result, compute_ms}`, where `inputs`
//! echoes the validated request. Errors answer with
//! `{schema_version, error: {status, kind, field, message}}`.
//!
//! | route | body |
//! |---|---|
//! | `GET /v1/health` | |
//! | `GET /v1/schema` | |
//! | `POST /v1/lod/{hte,ate,compound}` | scenario |
//! | `POST /v1/maximin/{hte,ate,compound}?surface=true` | scenario |
//! | `POST /v1/power/{point,bounds,curve}` | scenario |

mod config;
mod error;
pub mod schema;

use std::time::Instant;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};

use crt_design::ops::{self, PowerMode, SCHEMA_VERSION};
use crt_design::ScenarioConfig;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::trace::TraceLayer;

pub use config::{ServiceConfig, DEFAULT_MAX_CELLS};
pub use error::ApiError;

/// Largest accepted request body.
pub const BODY_LIMIT: usize = 256 * 1024;

#[derive(Debug, Clone)]
struct AppState {
    max_cells: usize,
}

type ApiResult = Result<Json<Value>, ApiError>;

pub fn router(config: &ServiceConfig) -> Router {
    let mut app = Router::new()
        .route("/v1/health", get(health))
        .route("/v1/schema", get(schema_document))
        .route("/v1/lod/{kind}", post(lod))
        .route("/v1/maximin/{kind}", post(maximin))
        .route("/v1/power/{kind}", post(power))
        .fallback(not_found)
        .with_state(AppState {
            max_cells: config.max_cells,
        })
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(TraceLayer::new_for_http());
    if let Some(origin) = &config.cors_origin {
        let allow = if origin == "*" {
            AllowOrigin::any()
        } else {
            match HeaderValue::from_str(origin) {
                Ok(v) => AllowOrigin::exact(v),
                Err(_) => {
                    tracing::warn!(origin, "ignoring unusable CORS origin");
                    return app;
                }
            }
        };
        app = app.layer(
            CorsLayer::new()
                .allow_origin(allow)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    app
}

/// Binds and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.addr()).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(&config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Runs [`serve`] on a runtime with the configured number of workers.
pub fn run(config: ServiceConfig) -> std::io::Result<()> {
    let mut rt = tokio::runtime::Builder::new_multi_thread();
    rt.enable_all();
    if let Some(w) = config.workers {
        rt.worker_threads(w);
    }
    rt.build()?.block_on(serve(config))
}

async fn health() -> Json<Value> {
    Json(json!({
        "status": "ok",
        "ready": true,
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
    }))
}

async fn schema_document() -> Json<Value> {
    Json(schema::document())
}

async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        kind: "not_found",
        field: "$".into(),
        message: "no such endpoint".into(),
    }
}

/// Decodes a scenario body, reporting the path of the first bad key.
pub fn parse_scenario(headers: &HeaderMap, body: &[u8]) -> Result<ScenarioConfig, ApiError> {
    let json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"));
    if !json {
        return Err(ApiError {
            status: StatusCode::UNSUPPORTED_MEDIA_TYPE,
            kind: "validation",
            field: "$".into(),
            message: "expected content-type application/json".into(),
        });
    }
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.to_string();
        let field = if path == "." {
            // Unknown keys are reported against the object itself.
            message
                .strip_prefix("unknown field `")
                .and_then(|s| s.split('`').next())
                .unwrap_or("$")
                .to_string()
        } else {
            path
        };
        ApiError::validation(field, message)
    })
}

fn body(headers: &HeaderMap, bytes: Result<Bytes, BytesRejection>) -> Result<ScenarioConfig, ApiError> {
    let bytes = bytes.map_err(|r| match r.status() {
        StatusCode::PAYLOAD_TOO_LARGE => ApiError::too_large("$", format!("body exceeds {BODY_LIMIT} bytes")),
        _ => ApiError::validation("$", r.body_text()),
    })?;
    parse_scenario(headers, &bytes)
}

/// Runs `f` off the async workers and wraps its result.
async fn respond<T, F>(endpoint: String, cfg: ScenarioConfig, f: F) -> ApiResult
where
    T: Serialize + Send + 'static,
    F: FnOnce(&ScenarioConfig) -> Result<T, ApiError> + Send + 'static,
{
    let start = Instant::now();
    let (cfg, result) = tokio::task::spawn_blocking(move || {
        let r = f(&cfg);
        (cfg, r)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?;
    let result = serde_json::to_value(result?).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(json!({
        "schema_version": SCHEMA_VERSION,
        "endpoint": endpoint,
        "inputs": cfg,
        "result": result,
        "compute_ms": start.elapsed().as_secs_f64() * 1e3,
    })))
}

async fn lod(
    Path(kind): Path<String>,
    headers: HeaderMap,
    bytes: Result<Bytes, BytesRejection>,
) -> ApiResult {
    let cfg = body(&headers, bytes)?;
    respond(format!("lod/{kind}"), cfg, move |c| Ok(ops::lod(c, &kind)?)).await
}

#[derive(Debug, Default, Deserialize)]
struct MaximinQuery {
    #[serde(default)]
    surface: bool,
}

async fn maximin(
    State(state): State<AppState>,
    Path(kind): Path<String>,
    query: Result<Query<MaximinQuery>, QueryRejection>,
    headers: HeaderMap,
    bytes: Result<Bytes, BytesRejection>,
) -> ApiResult {
    let Query(query) = query.map_err(|r| ApiError::validation("surface", r.body_text()))?;
    let cfg = body(&headers, bytes)?;
    let (search, criterion) = ops::maximin_plan(&cfg, &kind)?;
    let cells = cfg.maximin_cells()?;
    if cells > state.max_cells {
        return Err(ApiError::too_large(
            "grid_steps",
            format!(
                "{cells} criterion evaluations exceed the cap of {}",
                state.max_cells
            ),
        ));
    }
    respond(format!("maximin/{kind}"), cfg, move |_| {
        Ok(ops::run_maximin(&search, criterion, query.surface)?)
    })
    .await
}

async fn power(
    State(state): State<AppState>,
    Path(kind): Path<String>,
    headers: HeaderMap,
    bytes: Result<Bytes, BytesRejection>,
) -> ApiResult {
    let mode: PowerMode = kind.parse()?;
    let cfg = body(&headers, bytes)?;
    if mode != PowerMode::Point {
        let cells = cfg.parameter_space()?.cell_count();
        if cells > state.max_cells {
            return Err(ApiError::too_large(
                "grid_steps",
                format!("{cells} grid points exceed the cap of {}", state.max_cells),
            ));
        }
    }
    respond(format!("power/{kind}"), cfg, move |c| {
        Ok(ops::power_document(c, mode)?)
    })
    .await
}
