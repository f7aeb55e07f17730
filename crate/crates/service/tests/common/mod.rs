#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use base64::Engine;
use chrono::{DateTime, TimeZone, Utc};
use http_body_util::BodyExt;
use photoguide_core::image::{encode_ppm, RasterImage};
use photoguide_core::model::{AestheticScores, ModelError};
use photoguide_service::{FixedClock, Scorer, Service, ServiceConfig, Store};
use serde_json::{json, Value};
use tower::ServiceExt;

/// Reads scores straight out of the top-left pixel: red is the overall score,
/// green every attribute. Lets fixtures choose exact scores.
pub struct PixelScorer;

impl Scorer for PixelScorer {
    fn score(&self, img: &RasterImage) -> Result<AestheticScores, ModelError> {
        img.require_min_size(16, 16)?;
        let p = img.pixel(0, 0);
        AestheticScores::new(p[0], [p[1]; 6])
    }
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 5, 17, 9, 30, 0).unwrap()
}

pub struct Harness {
    pub service: Arc<Service>,
    pub clock: Arc<FixedClock>,
    pub app: Router,
}

struct SharedClock(Arc<FixedClock>);

impl photoguide_service::Clock for SharedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0.now()
    }
}

pub fn harness(dir: &Path) -> Harness {
    let clock = Arc::new(FixedClock::new(t0(), chrono::Duration::zero()));
    let service = Arc::new(Service::new(
        Store::open(dir).unwrap(),
        Box::new(PixelScorer),
        Box::new(SharedClock(clock.clone())),
        ServiceConfig::default(),
    ));
    let app = photoguide_service::router(service.clone());
    Harness { service, clock, app }
}

/// 16x16 PPM whose top-left pixel encodes the scores; `tag` varies another
/// pixel so equal scores can still have distinct bytes.
pub fn photo_bytes(overall: u8, attrs: u8, tag: u8) -> Vec<u8> {
    let img = RasterImage::from_fn(16, 16, |x, y| match (x, y) {
        (0, 0) => [overall as f64 / 255.0, attrs as f64 / 255.0, 0.5],
        (5, 5) => [tag as f64 / 255.0; 3],
        _ => [0.4, 0.5, 0.6],
    })
    .unwrap();
    encode_ppm(&img).unwrap()
}

pub fn b64(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

pub async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body)
}

pub async fn call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
    let mut b = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        b = b.header("authorization", format!("Bearer {t}"));
    }
    let req = match body {
        Some(v) => b
            .header("content-type", "application/json")
            .body(Body::from(v.to_string()))
            .unwrap(),
        None => b.body(Body::empty()).unwrap(),
    };
    let (status, bytes) = send(app, req).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

pub async fn signup(app: &Router, name: &str) -> (String, String) {
    let creds = json!({ "name": name, "password": format!("{name}-pass") });
    let (s, v) = call(app, "POST", "/api/users", None, Some(creds.clone())).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    let (s, v) = call(app, "POST", "/api/sessions", None, Some(creds)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    (v["user_id"].as_str().unwrap().into(), v["token"].as_str().unwrap().into())
}

pub async fn login(app: &Router, name: &str) -> String {
    let creds = json!({ "name": name, "password": format!("{name}-pass") });
    let (s, v) = call(app, "POST", "/api/sessions", None, Some(creds)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    v["token"].as_str().unwrap().into()
}

pub async fn upload(app: &Router, token: &str, bytes: &[u8]) -> (StatusCode, Value) {
    call(app, "POST", "/api/photos", Some(token), Some(json!({ "image_base64": b64(bytes) }))).await
}
