use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::{AnnotationStore, Filter, RUBRIC};
use crate::error::Error;

const INDEX_HTML: &str = include_str!("../../assets/index.html");
const DEFAULT_PAGE_SIZE: usize = 50;
const MAX_PAGE_SIZE: usize = 1000;

struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, detail: impl Into<String>) -> Self {
        Self { status, code, detail: detail.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "detail": self.detail }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let detail = e.to_string();
        match e {
            Error::UnknownEventIds(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", detail),
            Error::UnreadableAudio { .. } | Error::UnsupportedEncoding { .. } => {
                ApiError::new(StatusCode::NOT_FOUND, "audio_not_found", detail)
            }
            Error::InvalidParameter(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", detail),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", detail),
        }
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

fn bad_request(detail: impl Into<String>) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, "bad_request", detail)
}

#[derive(Deserialize)]
struct ListQuery {
    filter: Option<String>,
    page: Option<usize>,
    page_size: Option<usize>,
}

#[derive(Deserialize)]
struct PadQuery {
    pad_s: Option<f64>,
}

#[derive(Deserialize)]
struct ScoreBody {
    score: i64,
    #[serde(default)]
    annotator: String,
}

struct AppState {
    store: AnnotationStore,
    default_pad_s: f64,
}

type Shared = State<Arc<AppState>>;

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

async fn list_events(State(s): Shared, q: Result<Query<ListQuery>, QueryRejection>) -> ApiResult<Response> {
    let Query(q) = q.map_err(|e| bad_request(e.body_text()))?;
    let filter: Filter = q.filter.as_deref().unwrap_or("all").parse().map_err(|e: Error| bad_request(e.to_string()))?;
    let page_size = q.page_size.unwrap_or(DEFAULT_PAGE_SIZE);
    if page_size == 0 || page_size > MAX_PAGE_SIZE {
        return Err(bad_request(format!("page_size must be in 1..={MAX_PAGE_SIZE}")));
    }
    Ok(Json(s.store.list_events(filter, q.page.unwrap_or(0), page_size)?).into_response())
}

async fn spectrogram(State(s): Shared, Path(id): Path<String>, q: Result<Query<PadQuery>, QueryRejection>) -> ApiResult<Response> {
    let Query(q) = q.map_err(|e| bad_request(e.body_text()))?;
    let pad = q.pad_s.unwrap_or(s.default_pad_s);
    if !(pad >= 0.0) || !pad.is_finite() {
        return Err(bad_request("pad_s must be a non-negative number"));
    }
    let png = s.store.spectrogram_png(&id, pad)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn audio(State(s): Shared, Path(id): Path<String>, q: Result<Query<PadQuery>, QueryRejection>) -> ApiResult<Response> {
    let Query(q) = q.map_err(|e| bad_request(e.body_text()))?;
    let wav = s.store.audio_wav(&id, q.pad_s.unwrap_or(0.0))?;
    Ok(([(header::CONTENT_TYPE, "audio/wav")], wav).into_response())
}

async fn submit(State(s): Shared, Path(id): Path<String>, body: Result<Json<ScoreBody>, JsonRejection>) -> ApiResult<Response> {
    let Json(body) = body.map_err(|e| bad_request(e.body_text()))?;
    if s.store.event(&id).is_none() {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("unknown event {id}")));
    }
    if !(0..=4).contains(&body.score) {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_score", format!("score {} outside 0..=4", body.score)));
    }
    let store = Arc::clone(&s);
    // file append and fsync happen off the async workers
    let label = tokio::task::spawn_blocking(move || store.store.submit_score(&id, body.score, &body.annotator))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(label).into_response())
}

async fn rubric() -> Response {
    let items: Vec<_> = RUBRIC.iter().enumerate().map(|(score, text)| json!({ "score": score, "text": text })).collect();
    Json(items).into_response()
}

async fn progress(State(s): Shared) -> Response {
    Json(s.store.progress()).into_response()
}

async fn export(State(s): Shared) -> ApiResult<Response> {
    let store = Arc::clone(&s);
    let report = tokio::task::spawn_blocking(move || store.store.export_training_set())
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(report).into_response())
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

pub fn router(store: AnnotationStore, default_pad_s: f64) -> Router {
    let state = Arc::new(AppState { store, default_pad_s });
    Router::new()
        .route("/", get(index))
        .route("/api/events", get(list_events))
        .route("/api/events/{id}/spectrogram", get(spectrogram))
        .route("/api/events/{id}/audio", get(audio))
        .route("/api/events/{id}/score", post(submit))
        .route("/api/rubric", get(rubric))
        .route("/api/progress", get(progress))
        .route("/api/export", post(export))
        .fallback(not_found)
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(store: AnnotationStore, default_pad_s: f64, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!("annotation service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store, default_pad_s)).await
}
