use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use gestalt_core::dataset::build_curriculum;
use gestalt_core::tasks::{Registry, Task};
use gestalt_core::GrayImage;
use gestalt_trial::{router, AppState, TrialSets};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(root: &Path, logs: &Path) -> Router {
    let tick = Arc::new(AtomicU64::new(0));
    router(AppState::new(root, logs, Arc::new(move || tick.fetch_add(10, Ordering::Relaxed))))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let res = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

#[tokio::test]
async fn a_session_runs_end_to_end_over_http() {
    let data = tempfile::tempdir().unwrap();
    let logs = tempfile::tempdir().unwrap();
    build_curriculum(&Registry::builtin(), data.path(), 64, 40, 3).unwrap();
    let app = app(data.path(), logs.path());

    let (s, v) = json_call(&app, "POST", "/api/sessions", Some(json!({"task": "global-sym", "seed": 4}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["phase"], json!({"phase": "training", "round": 1}));
    assert_eq!(v["examples_seen"], 24);
    let id = v["id"].as_str().unwrap().to_string();
    let base = format!("/api/sessions/{id}");

    let (_, ex) = json_call(&app, "GET", &format!("{base}/exhibit"), None).await;
    assert_eq!(ex["class0"].as_array().unwrap().len(), 12);
    assert_eq!(ex["class1"].as_array().unwrap().len(), 12);
    let url = ex["class1"][0]["url"].as_str().unwrap();
    let (s, png) = call(&app, "GET", url, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(GrayImage::decode_png(&png).unwrap().width(), 200);

    let (_, more) = json_call(&app, "POST", &format!("{base}/more"), Some(json!({"class": 0}))).await;
    assert_eq!(more["items"].as_array().unwrap().len(), 3);
    assert_eq!(more["examples_seen"], 27);

    let (s, item) = json_call(&app, "POST", &format!("{base}/begin-testing"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!((item["round"].as_u64(), item["index"].as_u64(), item["of"].as_u64()), (Some(1), Some(1), Some(20)));

    // The player judges each image with the oracle, as a human would by eye.
    let mut answers = 0;
    let mut item = item;
    let mut verdicts = Vec::new();
    loop {
        let obj = item.as_object().unwrap();
        let mut fields: Vec<&str> = obj.keys().map(String::as_str).collect();
        fields.sort();
        assert_eq!(fields, ["index", "item", "of", "round"], "item payload carries only position");
        let n = item["item"].as_u64().unwrap();
        let (s, png) = call(&app, "GET", &format!("{base}/items/{n}/image"), None).await;
        assert_eq!(s, StatusCode::OK);
        let label = Task::GlobalSymmetry.judge(&GrayImage::decode_png(&png).unwrap()).unwrap().label;
        let (s, out) = json_call(&app, "POST", &format!("{base}/answer"), Some(json!({"item": n, "class": label.id(), "response_ms": 500}))).await;
        assert_eq!(s, StatusCode::OK, "{out}");
        answers += 1;
        if !out["verdict"].is_null() {
            verdicts.push(out["verdict"]["passed"].as_bool().unwrap());
        }
        if out["next"].is_null() {
            assert_eq!(out["phase"], json!({"phase": "passed"}));
            break;
        }
        item = out["next"].clone();
    }
    assert_eq!(answers, 80);
    assert_eq!(verdicts, [true; 4]);

    let (_, report) = json_call(&app, "GET", &format!("{base}/report"), None).await;
    assert_eq!(report["answers"], 80);
    assert_eq!(report["examples_seen"], 27);
    assert_eq!(report["rounds"].as_array().unwrap().len(), 4);

    // A second service over the same logs rebuilds the session.
    let restarted = self::app(data.path(), logs.path());
    let (s, again) = json_call(&restarted, "GET", &format!("{base}/report"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(again, report);
}

#[tokio::test]
async fn errors_map_to_statuses() {
    let data = tempfile::tempdir().unwrap();
    let logs = tempfile::tempdir().unwrap();
    build_curriculum(&Registry::builtin(), data.path(), 32, 40, 3).unwrap();
    let app = app(data.path(), logs.path());

    let (s, v) = json_call(&app, "GET", "/api/sessions/nope/report", None).await;
    assert_eq!((s, v["error"].as_str()), (StatusCode::NOT_FOUND, Some("unknown-session")));
    let (s, _) = json_call(&app, "POST", "/api/sessions", Some(json!({"task": "count", "seed": 1}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = json_call(&app, "POST", "/api/sessions", Some(json!({"task": "nonsense", "seed": 1}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (_, v) = json_call(&app, "POST", "/api/sessions", Some(json!({"task": "global-sym", "seed": 1, "id": "fixed"}))).await;
    assert_eq!(v["id"], "fixed");
    let (s, _) = json_call(&app, "POST", "/api/sessions", Some(json!({"task": "global-sym", "seed": 1, "id": "fixed"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, v) = json_call(&app, "GET", "/api/sessions/fixed/item", None).await;
    assert_eq!((s, v["error"].as_str()), (StatusCode::CONFLICT, Some("protocol")));
    let (_, item) = json_call(&app, "POST", "/api/sessions/fixed/begin-testing", None).await;
    let n = item["item"].as_u64().unwrap();
    let (s, _) = json_call(&app, "POST", "/api/sessions/fixed/more", Some(json!({"class": 1}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = call(&app, "GET", &format!("/api/sessions/fixed/items/{}/image", n + 1), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = json_call(&app, "POST", "/api/sessions/fixed/answer", Some(json!({"item": n, "class": 0}))).await;
    assert_eq!(s, StatusCode::OK);
    let (s, _) = json_call(&app, "POST", "/api/sessions/fixed/answer", Some(json!({"item": n, "class": 0}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, v) = json_call(&app, "POST", "/api/sessions/fixed/abandon", None).await;
    assert_eq!((s, &v["phase"]), (StatusCode::OK, &json!({"phase": "failed"})));

    let (s, _) = call(&app, "GET", "/images/global-sym/../../etc/passwd.png", None).await;
    assert_ne!(s, StatusCode::OK);
    let (s, _) = call(&app, "GET", "/images/global-sym/A1/manifest.json", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn log_holds_one_json_object_per_line() {
    let data = tempfile::tempdir().unwrap();
    let logs = tempfile::tempdir().unwrap();
    build_curriculum(&Registry::builtin(), data.path(), 32, 40, 3).unwrap();
    let app = app(data.path(), logs.path());
    json_call(&app, "POST", "/api/sessions", Some(json!({"task": "global-sym", "seed": 1, "id": "log"}))).await;
    json_call(&app, "POST", "/api/sessions/log/more", Some(json!({"class": 1}))).await;
    let text = std::fs::read_to_string(logs.path().join("log.jsonl")).unwrap();
    let kinds: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["event"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(kinds, ["created", "exhibited", "exhibited"]);
    // Exhibited keys resolve against the data root.
    let sets = TrialSets::load(data.path(), "global-sym", false).unwrap();
    let a1: HashMap<&str, _> = sets.training(1).entries.iter().map(|e| (e.key.as_str(), e.label)).collect();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    for it in last["items"].as_array().unwrap() {
        assert_eq!(a1[it["key"].as_str().unwrap()].id(), 1);
    }
}
