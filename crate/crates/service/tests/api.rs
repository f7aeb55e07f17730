mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use common::*;
use photoguide_core::image::encode_ppm;
use photoguide_core::synth::constant;
use serde_json::json;

#[tokio::test]
async fn accounts_and_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let h = harness(dir.path());
    let (user_id, token) = signup(&h.app, "ada").await;
    assert!(!token.is_empty() && !user_id.is_empty());

    let (s, v) = call(&h.app, "POST", "/api/users", None, Some(json!({"name": "ada", "password": "x"}))).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::CONFLICT, Some("duplicate_name")));
    assert_eq!(v["schema_version"], 1);

    let wrong = call(&h.app, "POST", "/api/sessions", None, Some(json!({"name": "ada", "password": "nope"}))).await;
    let unknown = call(&h.app, "POST", "/api/sessions", None, Some(json!({"name": "bob", "password": "nope"}))).await;
    assert_eq!(wrong, unknown);
    assert_eq!(wrong.0, StatusCode::UNAUTHORIZED);

    let (s, _) = call(&h.app, "POST", "/api/users", None, Some(json!({"name": " ", "password": "x"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let log = std::fs::read_to_string(dir.path().join("users.log")).unwrap();
    assert!(!log.contains("ada-pass"));
}

#[tokio::test]
async fn sessions_expire_after_a_day() {
    let dir = tempfile::tempdir().unwrap();
    let h = harness(dir.path());
    let (_, token) = signup(&h.app, "ada").await;
    h.clock.set(t0() + chrono::Duration::hours(25));
    let (s, v) = upload(&h.app, &token, &photo_bytes(100, 100, 0)).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::UNAUTHORIZED, Some("unauthenticated")));
}

#[tokio::test]
async fn uploads() {
    let dir = tempfile::tempdir().unwrap();
    let h = harness(dir.path());
    let (ada, token) = signup(&h.app, "ada").await;
    let (_, bob_token) = signup(&h.app, "bob").await;

    let bytes = photo_bytes(204, 51, 0);
    let (s, v) = upload(&h.app, &token, &bytes).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    let photo = &v["photo"];
    assert_eq!(photo["display"]["overall"], 80);
    assert_eq!(photo["display"]["attributes"].as_object().unwrap().len(), 6);
    assert_eq!(photo["scores"]["attributes"].as_object().unwrap().len(), 6);
    // every attribute sits at 20 < 40, so all six suggestions come back
    assert_eq!(photo["suggestions"].as_array().unwrap().len(), 6);
    assert_eq!(photo["owner"], ada.as_str());
    let id = photo["photo_id"].as_str().unwrap().to_string();

    let (s, again) = upload(&h.app, &token, &bytes).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!((again["created"].as_bool(), again["photo"]["photo_id"].as_str()), (Some(false), Some(id.as_str())));
    let lines = std::fs::read_to_string(dir.path().join("records.log")).unwrap();
    assert_eq!(lines.lines().count(), 1);

    let (s, v) = upload(&h.app, &bob_token, &bytes).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::CONFLICT, Some("photo_conflict")));

    let tiny = encode_ppm(&constant(8, 8, 0.5)).unwrap();
    let (s, v) = upload(&h.app, &token, &tiny).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("too_small")));

    let (s, v) = upload(&h.app, &token, b"definitely not an image").await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("undecodable")));

    let (s, _) = call(&h.app, "POST", "/api/photos", None, Some(json!({"image_base64": b64(&bytes)}))).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);

    let (s, v) = call(&h.app, "GET", &format!("/api/photos/{id}"), None, None).await;
    assert_eq!((s, v["photo"]["photo_id"].as_str()), (StatusCode::OK, Some(id.as_str())));
    let (s, _) = call(&h.app, "GET", "/api/photos/abc", None, None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn multipart_upload() {
    let dir = tempfile::tempdir().unwrap();
    let h = harness(dir.path());
    let (_, token) = signup(&h.app, "ada").await;
    let bytes = photo_bytes(10, 200, 3);
    let boundary = "XBOUNDARYX";
    let mut body = format!(
        "--{boundary}\r\nContent-Disposition: form-data; name=\"image\"; filename=\"a.ppm\"\r\nContent-Type: application/octet-stream\r\n\r\n"
    )
    .into_bytes();
    body.extend_from_slice(&bytes);
    body.extend_from_slice(format!("\r\n--{boundary}--\r\n").as_bytes());
    let req = Request::builder()
        .method("POST")
        .uri("/api/photos")
        .header("authorization", format!("Bearer {token}"))
        .header("content-type", format!("multipart/form-data; boundary={boundary}"))
        .body(Body::from(body))
        .unwrap();
    let (s, raw) = send(&h.app, req).await;
    let v: serde_json::Value = serde_json::from_slice(&raw).unwrap();
    assert_eq!(s, StatusCode::CREATED, "{v}");
    assert_eq!(v["photo"]["photo_id"], photoguide_service::store::photo_id(&bytes));
}

#[tokio::test]
async fn rankings_history_and_queries() {
    let dir = tempfile::tempdir().unwrap();
    let h = harness(dir.path());
    let (ada, token) = signup(&h.app, "ada").await;
    let (bob, bob_token) = signup(&h.app, "bob").await;

    let (s, v) = call(&h.app, "GET", "/api/rankings/daily?date=2026-05-17", None, None).await;
    assert_eq!((s, v["entries"].as_array().unwrap().len()), (StatusCode::OK, 0));
    let (_, v) = call(&h.app, "GET", "/api/recommendations", None, None).await;
    assert!(v["entries"].as_array().unwrap().is_empty());

    for (i, overall) in [230u8, 179, 204].into_iter().enumerate() {
        h.clock.set(t0() + chrono::Duration::minutes(i as i64));
        upload(&h.app, &token, &photo_bytes(overall, 128, i as u8)).await;
    }
    let (_, v) = call(&h.app, "GET", "/api/rankings/daily?date=2026-05-17", None, None).await;
    let scores: Vec<u64> = v["entries"].as_array().unwrap().iter().map(|e| e["display_score"].as_u64().unwrap()).collect();
    assert_eq!(scores, [90, 80, 70]);
    assert_eq!(v["entries"][0]["rank"], 1);
    assert_eq!(v["entries"][0]["owner_name"], "ada");

    let (_, v) = call(&h.app, "GET", "/api/recommendations?limit=2", None, None).await;
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);
    let (s, _) = call(&h.app, "GET", "/api/recommendations?limit=0", None, None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    for bad in ["/api/rankings/daily?date=2026-13-01", "/api/rankings/daily?date=yesterday", "/api/rankings/daily"] {
        let (s, v) = call(&h.app, "GET", bad, None, None).await;
        assert_eq!((s, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_request")), "{bad}");
    }

    let (s, v) = call(&h.app, "GET", &format!("/api/users/{ada}/history"), Some(&token), None).await;
    assert_eq!(s, StatusCode::OK);
    let times: Vec<&str> = v["photos"].as_array().unwrap().iter().map(|p| p["uploaded_at"].as_str().unwrap()).collect();
    let mut sorted = times.clone();
    sorted.sort_by(|a, b| b.cmp(a));
    assert_eq!(times, sorted);
    assert_eq!(times.len(), 3);

    let (s, v) = call(&h.app, "GET", &format!("/api/users/{ada}/history"), Some(&bob_token), None).await;
    assert_eq!((s, v["code"].as_str()), (StatusCode::FORBIDDEN, Some("forbidden")));
    let (_, v) = call(&h.app, "GET", &format!("/api/users/{bob}/history"), Some(&bob_token), None).await;
    assert!(v["photos"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn guidance_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let h = harness(dir.path());
    let bright = encode_ppm(&constant(64, 64, 0.9)).unwrap();
    let raw = |bytes: Vec<u8>, q: &str| {
        Request::builder()
            .method("POST")
            .uri(format!("/api/guidance{q}"))
            .header("content-type", "application/octet-stream")
            .body(Body::from(bytes))
            .unwrap()
    };
    let (s, body) = send(&h.app, raw(bright.clone(), "")).await;
    let v: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["prompts"][0]["token"], "too bright");
    assert!(v.get("scores").is_none());

    let (_, scored) = send(&h.app, raw(bright.clone(), "?score=true")).await;
    let v: serde_json::Value = serde_json::from_slice(&scored).unwrap();
    assert_eq!(v["scores"]["attributes"].as_object().unwrap().len(), 6);
    assert!(v["scores"]["overall"].is_number());
    assert_eq!(v["display"]["ranked"].as_array().unwrap().len(), 6);
    let (_, again) = send(&h.app, raw(bright.clone(), "?score=true")).await;
    assert_eq!(scored, again);

    let (s, v) = call(&h.app, "POST", "/api/guidance", None, Some(json!({"image_base64": b64(&bright)}))).await;
    assert_eq!((s, v["prompts"][0]["token"].as_str()), (StatusCode::OK, Some("too bright")));

    let (s, body) = send(&h.app, raw(b"garbage".to_vec(), "")).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{}", String::from_utf8_lossy(&body));
    let (s, _) = send(&h.app, raw(bright, "?score=maybe")).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn health_and_unknown_routes() {
    let dir = tempfile::tempdir().unwrap();
    let h = harness(dir.path());
    let (s, v) = call(&h.app, "GET", "/api/health", None, None).await;
    assert_eq!((s, v["status"].as_str(), v["schema_version"].as_u64()), (StatusCode::OK, Some("ok"), Some(1)));
    let (s, v) = call(&h.app, "GET", "/api/nope", None, None).await;
    assert_eq!((s, v["schema_version"].as_u64()), (StatusCode::NOT_FOUND, Some(1)));
}
