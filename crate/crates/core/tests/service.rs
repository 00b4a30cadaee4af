mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use marvist::persist::GalleryClient;
use marvist::service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(AppState::new(
        GalleryClient::new(None, common::fixture("gallery")),
        common::fixtures(),
    ))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn session(app: &Router) -> String {
    let (status, body) = call(app, "POST", "/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["seq"], 0);
    body["session"].as_str().unwrap().to_string()
}

async fn command(app: &Router, id: &str, line: &str) -> (StatusCode, Value) {
    call(app, "POST", &format!("/sessions/{id}/commands"), Some(json!({"command": line}))).await
}

async fn setup_trip(app: &Router, id: &str) {
    for line in [
        "load-data data/bob_trip.csv --type \"rank=ord:1|2|3|4|5\"",
        "fetch-glyph house",
        "fetch-glyph money_stack",
        "instantiate --template house --where kind=hotel --collection houses",
        "instantiate --template money_stack --where kind=expense --collection money",
    ] {
        let (status, body) = command(app, id, line).await;
        assert_eq!(status, StatusCode::OK, "{line}: {body}");
    }
}

#[tokio::test]
async fn bind_updates_scene_extents() {
    let app = app();
    let id = session(&app).await;
    setup_trip(&app, &id).await;
    let (status, body) = command(&app, &id, "bind --attr cost --channel length_y").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["report"]["overall_valid"], true);
    assert_eq!(body["seq"], 6);

    let (_, scene) = call(&app, "GET", &format!("/sessions/{id}/scene"), None).await;
    let glyphs = scene["glyphs"].as_array().unwrap();
    assert_eq!(glyphs.len(), 10);
    let heights: Vec<f64> = glyphs
        .iter()
        .map(|g| g["channel_values"]["length_y"].as_f64().unwrap())
        .collect();
    // Houses cost 140, 95, 180, 110, 160; the tallest spans 260.
    let scale = heights[0] / 140.0;
    assert!((heights[2] - 180.0 * scale).abs() < 1e-15);
    assert!((heights[7] - 260.0 * scale).abs() < 1e-15);
}

#[tokio::test]
async fn separability_violation_is_advisory() {
    let app = app();
    let id = session(&app).await;
    setup_trip(&app, &id).await;
    command(&app, &id, "bind --attr cost --channel length_y").await;
    let (status, body) = command(&app, &id, "bind --attr rank --channel length_z").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["report"]["overall_valid"], false);
    let warnings = body["outcome"]["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w["rule"] == "separability"));

    let (_, v) = call(&app, "GET", &format!("/sessions/{id}/validation"), None).await;
    assert_eq!(v["last"]["overall_valid"], false);
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn undo_restores_identical_snapshot() {
    let app = app();
    let id = session(&app).await;
    setup_trip(&app, &id).await;
    let (_, before) = call(&app, "GET", &format!("/sessions/{id}/scene"), None).await;
    command(&app, &id, "bind --attr cost --channel length_y").await;
    let (_, bound) = call(&app, "GET", &format!("/sessions/{id}/scene"), None).await;
    assert_ne!(before, bound);

    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::OK);
    let (_, undone) = call(&app, "GET", &format!("/sessions/{id}/scene"), None).await;
    assert_eq!(undone.to_string(), before.to_string());

    call(&app, "POST", &format!("/sessions/{id}/redo"), None).await;
    let (_, redone) = call(&app, "GET", &format!("/sessions/{id}/scene"), None).await;
    assert_eq!(redone.to_string(), bound.to_string());

    // Reads are side-effect free.
    let (_, again) = call(&app, "GET", &format!("/sessions/{id}/scene"), None).await;
    assert_eq!(again, redone);
}

#[tokio::test]
async fn error_statuses() {
    let app = app();
    let (status, body) = call(&app, "GET", "/sessions/not-a-session/scene", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "UnknownSession");

    let id = session(&app).await;
    let (status, body) = command(&app, &id, "instantiate --template castle").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "UnknownTemplate");

    let (status, body) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/commands"),
        Some(json!({"command": "fetch-glyph cube", "seq": 5})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "Conflict");

    let (status, body) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/commands"),
        Some(json!({"command": "fetch-glyph cube", "seq": 0})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["seq"], 1);

    let (status, _) = call(&app, "DELETE", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = command(&app, &id, "fetch-glyph cube").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn ranked_and_export() {
    let app = app();
    let id = session(&app).await;
    setup_trip(&app, &id).await;
    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/ranked?attr=cost"), None).await;
    assert_eq!(status, StatusCode::OK);
    let ranked: Vec<&str> = body["ranked"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["channel"].as_str().unwrap())
        .collect();
    assert_eq!(&ranked[..3], ["length_x", "length_y", "length_z"]);
    assert_eq!(body["recommended"]["channel"], "length_x");

    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/ranked?attr=nope"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "UnknownAttribute");

    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/export"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["nodes"].as_array().unwrap().len(), 10);

    let (status, body) = call(&app, "GET", "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn commands_apply_in_a_serial_order() {
    let app = app();
    let id = session(&app).await;
    command(&app, &id, "fetch-glyph cube").await;
    let tasks: Vec<_> = (0..16)
        .map(|_| {
            let app = app.clone();
            let id = id.clone();
            tokio::spawn(async move { command(&app, &id, "fetch-glyph sphere").await })
        })
        .collect();
    let mut seqs = Vec::new();
    for t in tasks {
        let (status, body) = t.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        seqs.push(body["seq"].as_u64().unwrap());
    }
    seqs.sort_unstable();
    assert_eq!(seqs, (2..18).collect::<Vec<u64>>());
}
