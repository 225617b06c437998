use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use oncograph_core::dynamics::{metrics_csv_string, AngiogenicSwitch};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;

use crate::error::ServiceError;
use crate::session::{CreateSession, SessionService};

type Shared = Arc<SessionService>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::Validation { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Unavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = match self.field() {
            Some(field) => json!({ "error": self.to_string(), "field": field }),
            None => json!({ "error": self.to_string() }),
        };
        (status, Json(body)).into_response()
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    let text = std::str::from_utf8(body).map_err(|e| ServiceError::Validation {
        field: None,
        message: format!("body is not UTF-8: {e}"),
    })?;
    oncograph_core::error::from_json_str(text).map_err(ServiceError::from)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GrowBody {
    n_new: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepBody {
    k: usize,
}

#[derive(Deserialize)]
struct MetricsQuery {
    format: Option<String>,
}

async fn create(State(svc): State<Shared>, body: Bytes) -> Result<Response, ServiceError> {
    let init: CreateSession = parse(&body)?;
    let id = blocking(move || svc.create_session(init)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id }))).into_response())
}

async fn list(State(svc): State<Shared>) -> Response {
    Json(json!({ "sessions": svc.session_ids() })).into_response()
}

async fn summary(
    State(svc): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    Ok(Json(svc.query_summary(&id)?).into_response())
}

async fn grow(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let GrowBody { n_new } = parse(&body)?;
    Ok(Json(blocking(move || svc.command_grow(&id, n_new)).await?).into_response())
}

async fn switch(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let switch: AngiogenicSwitch = parse(&body)?;
    Ok(Json(svc.command_set_switch(&id, switch)?).into_response())
}

async fn step(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let StepBody { k } = parse(&body)?;
    Ok(Json(blocking(move || svc.command_step(&id, k)).await?).into_response())
}

async fn snapshot(
    State(svc): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let snap = svc.query_snapshot(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], snap.to_json()).into_response())
}

async fn metrics(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<MetricsQuery>,
) -> Result<Response, ServiceError> {
    let rows = svc.query_metrics(&id)?;
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(rows).into_response()),
        Some("csv") => {
            let text = metrics_csv_string(&rows);
            Ok(([(header::CONTENT_TYPE, "text/csv")], text).into_response())
        }
        Some(other) => Err(ServiceError::Validation {
            field: Some("format".into()),
            message: format!("unknown format `{other}`, expected json or csv"),
        }),
    }
}

async fn profile(
    State(svc): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    Ok(Json(blocking(move || svc.query_profile(&id)).await?).into_response())
}

async fn log(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(svc.query_log(&id)?).into_response())
}

async fn fork(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let new_id = svc.fork_session(&id)?;
    Ok((StatusCode::CREATED, Json(json!({ "session_id": new_id }))).into_response())
}

async fn persist(
    State(svc): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let path = blocking(move || svc.persist(&id)).await?;
    Ok(Json(json!({ "log": path.display().to_string() })).into_response())
}

async fn delete(
    State(svc): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    svc.delete_session(&id)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(summary).delete(delete))
        .route("/sessions/{id}/grow", post(grow))
        .route("/sessions/{id}/switch", post(switch))
        .route("/sessions/{id}/step", post(step))
        .route("/sessions/{id}/snapshot", get(snapshot))
        .route("/sessions/{id}/metrics", get(metrics))
        .route("/sessions/{id}/profile", get(profile))
        .route("/sessions/{id}/log", get(log))
        .route("/sessions/{id}/fork", post(fork))
        .route("/sessions/{id}/persist", post(persist))
        .with_state(service)
}

/// Serve until `shutdown` resolves, evicting idle sessions in the background
/// and persisting the survivors on the way out.
pub async fn serve(
    listener: TcpListener,
    service: Shared,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let sweep = service
        .ttl()
        .min(Duration::from_secs(60))
        .max(Duration::from_millis(100));
    let evictor = {
        let service = service.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(sweep);
            loop {
                tick.tick().await;
                for id in service.evict_idle() {
                    tracing::info!(session = %id, "evicted idle session");
                }
            }
        })
    };
    let result = axum::serve(listener, router(service.clone()))
        .with_graceful_shutdown(shutdown)
        .await;
    evictor.abort();
    match service.flush_all() {
        Ok(paths) if !paths.is_empty() => {
            tracing::info!(count = paths.len(), "persisted session logs")
        }
        Ok(_) => {}
        Err(err) => tracing::error!(%err, "failed to persist session logs"),
    }
    result
}
