//! JSON-over-HTTP routes. Every body, including errors, carries
//! `schema_version`.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | POST | `/api/users` | `{name, password}` |
//! | POST | `/api/sessions` | `{name, password}` -> bearer token |
//! | POST | `/api/photos` | JSON `{image_base64}` or multipart field `image` |
//! | GET | `/api/photos/{id}` | |
//! | GET | `/api/rankings/daily` | `?date=YYYY-MM-DD` |
//! | GET | `/api/recommendations` | `?limit=N` (default 10) |
//! | GET | `/api/users/{id}/history` | bearer token of that user |
//! | POST | `/api/guidance` | `?score=bool`; raw image bytes or `{image_base64}` |
//! | GET | `/api/health` | |

use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use chrono::NaiveDate;
use photoguide_core::model::{display_score, Attribute};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::store::PhotoRecord;
use crate::{Service, ServiceError};

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_BODY_BYTES: usize = 32 * 1024 * 1024;
pub const DEFAULT_RECOMMENDATIONS: usize = 10;

type Shared = Arc<Service>;

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Unauthenticated | ServiceError::BadCredentials => StatusCode::UNAUTHORIZED,
            ServiceError::Forbidden => StatusCode::FORBIDDEN,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::DuplicateName | ServiceError::PhotoConflict => StatusCode::CONFLICT,
            ServiceError::Undecodable(_) | ServiceError::TooSmall(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Store(_) | ServiceError::Internal(_) | ServiceError::Io(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if self.status().is_server_error() {
            log::error!("{self}");
        }
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "code": self.code(),
            "message": self.to_string(),
        });
        (self.status(), Json(body)).into_response()
    }
}

type ApiResult = Result<(StatusCode, Json<Value>), ServiceError>;

fn ok(status: StatusCode, mut body: Value) -> ApiResult {
    body["schema_version"] = json!(SCHEMA_VERSION);
    Ok((status, Json(body)))
}

fn photo_view(svc: &Service, p: &PhotoRecord) -> Value {
    let catalog = &svc.config().catalog;
    let display: serde_json::Map<String, Value> = Attribute::ALL
        .iter()
        .map(|&a| (a.key().to_string(), json!(display_score(p.scores.attribute(a)))))
        .collect();
    let suggestions: Vec<Value> = p
        .suggestions
        .iter()
        .map(|id| {
            let text = catalog.suggestions.values().find(|e| &e.id == id).map(|e| e.text.clone());
            json!({ "id": id, "text": text })
        })
        .collect();
    json!({
        "photo_id": p.photo_id,
        "owner": p.owner,
        "owner_name": svc.owner_name(&p.owner),
        "uploaded_at": p.uploaded_at,
        "day_bucket": p.day_bucket,
        "width": p.width,
        "height": p.height,
        "scores": p.scores,
        "display": { "overall": p.scores.display_overall(), "attributes": display },
        "suggestions": suggestions,
    })
}

fn bearer(headers: &HeaderMap) -> Result<String, ServiceError> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(|t| t.trim().to_string())
        .ok_or(ServiceError::Unauthenticated)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

#[derive(Deserialize)]
struct Credentials {
    name: String,
    password: String,
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(format!("invalid JSON body: {e}")))
}

async fn create_user(State(svc): State<Shared>, body: Bytes) -> ApiResult {
    let c: Credentials = parse_json(&body)?;
    let u = blocking(move || svc.create_user(&c.name, &c.password)).await?;
    ok(
        StatusCode::CREATED,
        json!({ "user_id": u.user_id, "name": u.name, "created_at": u.created_at }),
    )
}

async fn create_session(State(svc): State<Shared>, body: Bytes) -> ApiResult {
    let c: Credentials = parse_json(&body)?;
    let (user_id, token, expires_at) = blocking(move || svc.login(&c.name, &c.password)).await?;
    ok(
        StatusCode::OK,
        json!({ "user_id": user_id, "token": token, "expires_at": expires_at }),
    )
}

#[derive(Deserialize)]
struct ImageBody {
    image_base64: String,
}

fn decode_base64_body(body: &[u8]) -> Result<Vec<u8>, ServiceError> {
    let b: ImageBody = parse_json(body)?;
    base64::engine::general_purpose::STANDARD
        .decode(b.image_base64.trim())
        .map_err(|e| ServiceError::BadRequest(format!("invalid base64: {e}")))
}

fn content_type(headers: &HeaderMap) -> String {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
        .to_ascii_lowercase()
}

async fn image_from_upload(req: Request) -> Result<Vec<u8>, ServiceError> {
    if content_type(req.headers()).starts_with("multipart/form-data") {
        let mut mp = Multipart::from_request(req, &())
            .await
            .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        while let Some(field) = mp.next_field().await.map_err(|e| ServiceError::BadRequest(e.to_string()))? {
            if field.name() == Some("image") {
                let data = field.bytes().await.map_err(|e| ServiceError::BadRequest(e.to_string()))?;
                return Ok(data.to_vec());
            }
        }
        Err(ServiceError::BadRequest("multipart body has no \"image\" field".into()))
    } else {
        let body = Bytes::from_request(req, &())
            .await
            .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        decode_base64_body(&body)
    }
}

async fn upload_photo(State(svc): State<Shared>, req: Request) -> ApiResult {
    let token = bearer(req.headers())?;
    svc.authenticate(&token)?;
    let bytes = image_from_upload(req).await?;
    let svc2 = svc.clone();
    let (record, created) = blocking(move || svc2.upload_photo(&token, &bytes)).await?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    ok(status, json!({ "created": created, "photo": photo_view(&svc, &record) }))
}

async fn get_photo(State(svc): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let p = svc.photo(&id)?;
    ok(StatusCode::OK, json!({ "photo": photo_view(&svc, &p) }))
}

#[derive(Deserialize)]
struct DateQuery {
    date: Option<String>,
}

async fn daily_ranking(State(svc): State<Shared>, Query(q): Query<DateQuery>) -> ApiResult {
    let raw = q.date.ok_or_else(|| ServiceError::BadRequest("missing date".into()))?;
    let day = NaiveDate::parse_from_str(&raw, "%Y-%m-%d")
        .map_err(|_| ServiceError::BadRequest(format!("malformed date {raw:?}, expected YYYY-MM-DD")))?;
    ok(
        StatusCode::OK,
        json!({ "date": day, "entries": svc.daily_ranking(day) }),
    )
}

#[derive(Deserialize)]
struct LimitQuery {
    limit: Option<String>,
}

async fn recommendations(State(svc): State<Shared>, Query(q): Query<LimitQuery>) -> ApiResult {
    let limit = match q.limit {
        None => DEFAULT_RECOMMENDATIONS,
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| ServiceError::BadRequest(format!("invalid limit {s:?}")))?,
    };
    ok(StatusCode::OK, json!({ "entries": svc.recommendations(limit)? }))
}

async fn history(State(svc): State<Shared>, headers: HeaderMap, Path(user_id): Path<String>) -> ApiResult {
    let token = bearer(&headers)?;
    let photos: Vec<Value> = svc.history(&token, &user_id)?.iter().map(|p| photo_view(&svc, p)).collect();
    ok(StatusCode::OK, json!({ "user_id": user_id, "photos": photos }))
}

#[derive(Deserialize)]
struct ScoreQuery {
    score: Option<String>,
}

async fn guidance(State(svc): State<Shared>, Query(q): Query<ScoreQuery>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let score = match q.score.as_deref() {
        None | Some("false") | Some("0") => false,
        Some("true") | Some("1") => true,
        Some(other) => return Err(ServiceError::BadRequest(format!("invalid score flag {other:?}"))),
    };
    let bytes = if content_type(&headers).starts_with("application/json") {
        decode_base64_body(&body)?
    } else {
        body.to_vec()
    };
    let result = blocking(move || svc.guidance(&bytes, score)).await?;
    let mut body = serde_json::to_value(&result).map_err(|e| ServiceError::Internal(e.to_string()))?;
    if let Some(s) = &result.scores {
        body["display"] = json!({
            "overall": s.display_overall(),
            "ranked": s.ranked_attributes().iter().map(|(a, v)| json!({ "attribute": a, "display": display_score(*v) })).collect::<Vec<_>>(),
        });
    }
    ok(StatusCode::OK, body)
}

async fn health() -> ApiResult {
    ok(StatusCode::OK, json!({ "status": "ok" }))
}

async fn fallback() -> ServiceError {
    ServiceError::NotFound("route".into())
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/api/users", post(create_user))
        .route("/api/sessions", post(create_session))
        .route("/api/photos", post(upload_photo))
        .route("/api/photos/{id}", get(get_photo))
        .route("/api/rankings/daily", get(daily_ranking))
        .route("/api/recommendations", get(recommendations))
        .route("/api/users/{id}/history", get(history))
        .route("/api/guidance", post(guidance))
        .route("/api/health", get(health))
        .fallback(fallback)
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(svc)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    svc: Arc<Service>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(svc)).with_graceful_shutdown(shutdown).await
}
