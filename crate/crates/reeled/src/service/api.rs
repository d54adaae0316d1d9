//! HTTP routes. Every route except `/media/` needs `Authorization: Bearer`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use reeled_core::llm::ReelSpec;
use reeled_core::planner::PlanError;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;
use uuid::Uuid;

use super::export::ExportFilter;
use super::model::Condition;
use super::{EventInput, Principal, QuizSubmission, ReelPatch, Role, Service, ServiceError};

/// Bearer token to principal.
#[derive(Debug, Clone, Default)]
pub struct TokenRegistry {
    tokens: HashMap<String, Principal>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenEntry {
    pub token: String,
    pub role: Role,
    pub user: String,
}

impl TokenRegistry {
    pub fn new(entries: impl IntoIterator<Item = TokenEntry>) -> Self {
        Self {
            tokens: entries.into_iter().map(|e| (e.token, Principal::new(e.role, e.user))).collect(),
        }
    }

    /// Reads a JSON array of `{"token", "role", "user"}` objects.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let raw = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let entries: Vec<TokenEntry> = serde_json::from_slice(&raw).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(Self::new(entries))
    }

    pub fn insert(&mut self, token: impl Into<String>, who: Principal) {
        self.tokens.insert(token.into(), who);
    }

    fn resolve(&self, headers: &HeaderMap) -> Result<Principal, ApiError> {
        let token = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or(ApiError::Unauthorized)?;
        self.tokens.get(token.trim()).cloned().ok_or(ApiError::Unauthorized)
    }
}

#[derive(Clone)]
struct AppState {
    service: Arc<Service>,
    tokens: Arc<TokenRegistry>,
}

#[derive(Debug)]
pub enum ApiError {
    Unauthorized,
    BadRequest(String),
    Service(ServiceError),
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        Self::Service(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::BadRequest(e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        Self::BadRequest(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::BadRequest(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = match self {
            Self::Unauthorized => {
                return (StatusCode::UNAUTHORIZED, Json(json!({"error": "unauthorized", "message": "missing or unknown bearer token"})))
                    .into_response()
            }
            Self::BadRequest(m) => return (StatusCode::BAD_REQUEST, Json(json!({"error": "bad_request", "message": m}))).into_response(),
            Self::Service(e) => e,
        };
        use ServiceError as E;
        let (status, code) = match &e {
            E::Spec(_) => (StatusCode::UNPROCESSABLE_ENTITY, "spec_error"),
            E::SourceUnresolvable(_) => (StatusCode::UNPROCESSABLE_ENTITY, "source_unresolvable"),
            E::NotFound { .. } => (StatusCode::NOT_FOUND, "not_found"),
            E::Forbidden(_) => (StatusCode::FORBIDDEN, "forbidden"),
            E::Plan { error: PlanError::InfeasibleSegment { .. }, .. } => (StatusCode::UNPROCESSABLE_ENTITY, "infeasible_segment"),
            E::Plan { .. } => (StatusCode::CONFLICT, "plan_error"),
            E::SessionUnknown(_) => (StatusCode::NOT_FOUND, "session_unknown"),
            E::OrderViolation(_) => (StatusCode::CONFLICT, "order_violation"),
            E::AlreadySubmitted(_) => (StatusCode::CONFLICT, "already_submitted"),
            E::UnknownItem(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unknown_item"),
            E::InvalidEvent(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_event"),
            E::Invalid(_) => (StatusCode::BAD_REQUEST, "invalid"),
            E::EmptyFilter => (StatusCode::NOT_FOUND, "empty_filter"),
            E::NotReady(_) => (StatusCode::CONFLICT, "not_ready"),
            E::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let mut body = json!({"error": code, "message": e.to_string()});
        if let E::Plan { error: PlanError::SiblingOverlap { sibling, .. }, conflicting_reel } = &e {
            body["sibling_order"] = json!(sibling);
            body["conflicting_reel"] = json!(conflicting_reel);
        }
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(service: Arc<Service>, tokens: TokenRegistry, media_root: &Path) -> Router {
    let state = AppState { service, tokens: Arc::new(tokens) };
    Router::new()
        .route("/api/jobs", post(create_job))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/reels", get(list_reels))
        .route("/api/reels/{id}", axum::routing::patch(patch_reel))
        .route("/api/reels/{id}/rating", post(rate_reel))
        .route("/api/assignments", post(create_assignment))
        .route("/api/assignments/{id}/reels", get(assignment_reels))
        .route("/api/assignments/{id}/quiz", post(submit_quiz))
        .route("/api/events", post(record_event))
        .route("/api/export.csv", get(export_csv))
        .nest_service("/media", ServeDir::new(media_root))
        .with_state(state)
}

#[derive(Debug, Deserialize)]
struct SpecInput {
    reel_count: u32,
    min_duration_s: u32,
    max_duration_s: u32,
    target_duration_s: Option<u32>,
}

#[derive(Debug, Deserialize)]
struct CreateJob {
    source_uri: String,
    captions_ref: String,
    spec: SpecInput,
}

async fn create_job(State(s): State<AppState>, headers: HeaderMap, body: Result<Json<CreateJob>, JsonRejection>) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let Json(req) = body?;
    let spec = ReelSpec::new(req.spec.reel_count, req.spec.min_duration_s, req.spec.max_duration_s)
        .and_then(|spec| match req.spec.target_duration_s {
            Some(t) => spec.with_target(t),
            None => Ok(spec),
        })
        .map_err(ServiceError::from)?;
    let job = s.service.create_job(&who, &req.source_uri, &req.captions_ref, spec)?;
    Ok((StatusCode::CREATED, Json(job)).into_response())
}

async fn get_job(State(s): State<AppState>, headers: HeaderMap, id: Result<UrlPath<Uuid>, PathRejection>) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let UrlPath(id) = id?;
    Ok(Json(s.service.job(&who, id)?).into_response())
}

#[derive(Debug, Deserialize)]
struct ReelsQuery {
    job: Uuid,
}

async fn list_reels(State(s): State<AppState>, headers: HeaderMap, q: Result<Query<ReelsQuery>, QueryRejection>) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let Query(q) = q?;
    Ok(Json(s.service.reels(&who, q.job)?).into_response())
}

async fn patch_reel(
    State(s): State<AppState>,
    headers: HeaderMap,
    id: Result<UrlPath<Uuid>, PathRejection>,
    body: Result<Json<ReelPatch>, JsonRejection>,
) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let (UrlPath(id), Json(patch)) = (id?, body?);
    Ok(Json(s.service.update_reel(&who, id, &patch)?).into_response())
}

#[derive(Debug, Deserialize)]
struct Rating {
    assignment_id: Uuid,
    value: u8,
    #[serde(default)]
    wall_time_ms: Option<i64>,
}

async fn rate_reel(
    State(s): State<AppState>,
    headers: HeaderMap,
    id: Result<UrlPath<Uuid>, PathRejection>,
    body: Result<Json<Rating>, JsonRejection>,
) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let (UrlPath(id), Json(r)) = (id?, body?);
    let e = s.service.rate_reel(&who, id, r.assignment_id, r.value, r.wall_time_ms)?;
    Ok((StatusCode::CREATED, Json(e)).into_response())
}

#[derive(Debug, Deserialize)]
struct CreateAssignment {
    reel_set_id: Uuid,
    student_id: String,
    #[serde(default)]
    quiz_id: Option<String>,
    condition: Condition,
}

async fn create_assignment(
    State(s): State<AppState>,
    headers: HeaderMap,
    body: Result<Json<CreateAssignment>, JsonRejection>,
) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let Json(req) = body?;
    let a = s.service.create_assignment(&who, req.reel_set_id, &req.student_id, req.quiz_id.as_deref(), req.condition)?;
    Ok((StatusCode::CREATED, Json(a)).into_response())
}

async fn assignment_reels(State(s): State<AppState>, headers: HeaderMap, id: Result<UrlPath<Uuid>, PathRejection>) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let UrlPath(id) = id?;
    Ok(Json(s.service.assignment_reels(&who, id)?).into_response())
}

async fn submit_quiz(
    State(s): State<AppState>,
    headers: HeaderMap,
    id: Result<UrlPath<Uuid>, PathRejection>,
    body: Result<Json<QuizSubmission>, JsonRejection>,
) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let (UrlPath(id), Json(sub)) = (id?, body?);
    let r = s.service.submit_quiz(&who, id, &sub)?;
    Ok((StatusCode::CREATED, Json(r)).into_response())
}

async fn record_event(State(s): State<AppState>, headers: HeaderMap, body: Result<Json<EventInput>, JsonRejection>) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let Json(e) = body?;
    let stored = s.service.record_event(&who, e)?;
    Ok((StatusCode::CREATED, Json(stored)).into_response())
}

async fn export_csv(State(s): State<AppState>, headers: HeaderMap, q: Result<Query<ExportFilter>, QueryRejection>) -> ApiResult<Response> {
    let who = s.tokens.resolve(&headers)?;
    let Query(filter) = q?;
    let body = s.service.export_csv(&who, &filter)?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response())
}
