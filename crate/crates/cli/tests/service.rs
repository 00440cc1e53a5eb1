use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use roundelim_cli::dispatch;
use roundelim_cli::ops::{diagram_json, problem_hash, speedup};
use roundelim_cli::service::{router, AppState};
use roundelim_cli::session::{Session, Snapshot};
use roundelim_core::cert::{verify_certificate, Certificate};
use roundelim_core::problem::{parse_problem, render_problem, Side};
use roundelim_core::re::ReLimits;
use serde_json::{json, Value};
use tower::ServiceExt;

const BMM: &str = "delta: 3\nwhite:\nM O^2\nP^3\nblack:\nM [OP]^2\nO^3\n";
const MERGE: &str = "delta: 3\nwhite:\nM O^2\nY P^2\nX Z O\nblack:\n[MYX] [PYOX]^2\n[ZMPYOX] [OX]^2\n";

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

async fn create(app: &Router, problem: &str) -> String {
    let (status, v) = call(app, "POST", "/sessions", Some(json!({ "problem": problem }))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn step_then_diagram() {
    let app = router(AppState::new(None));
    let id = create(&app, BMM).await;
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/actions"), Some(json!({ "kind": "re_black" }))).await;
    assert_eq!(status, StatusCode::OK, "{v}");

    let stepped = speedup(&parse_problem(BMM).unwrap(), Side::Black, false, &ReLimits::default()).unwrap();
    assert_eq!(v["problem"], render_problem(&stepped.problem));
    assert_eq!(v["hash"], problem_hash(&stepped.problem));

    let (status, d) = call(&app, "GET", &format!("/sessions/{id}/diagram?side=black"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(d, diagram_json(&stepped.problem, Side::Black).unwrap());

    let (_, z) = call(&app, "GET", &format!("/sessions/{id}/zeroround?side=black"), None).await;
    assert_eq!(z["side"], "black");
    assert!(z["solvable"].is_boolean());
}

#[tokio::test]
async fn cli_and_service_render_identically() {
    let app = router(AppState::new(None));
    let id = create(&app, BMM).await;
    let (_, v) = call(&app, "POST", &format!("/sessions/{id}/actions"), Some(json!({ "kind": "re_white" }))).await;

    let file = std::env::temp_dir().join(format!("roundelim-svc-{}.txt", std::process::id()));
    std::fs::write(&file, BMM).unwrap();
    let mut out = Vec::new();
    let code = dispatch(
        ["roundelim", "speedup", "--side", "white", "-f", file.to_str().unwrap()],
        &mut out,
        &mut Vec::new(),
    );
    let _ = std::fs::remove_file(file);
    assert_eq!(code, 0);
    let cli = String::from_utf8(out).unwrap();
    let problem = v["problem"].as_str().unwrap();
    assert!(cli.starts_with(problem), "{cli}\n---\n{problem}");
    assert!(cli[problem.len()..].starts_with("sets:\n"));
}

#[tokio::test]
async fn merge_undo_redo_and_history() {
    let app = router(AppState::new(None));
    let id = create(&app, MERGE).await;
    let (_, before) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    let merge = json!({ "kind": "merge", "side": "white", "pairs": [["Y", "X"]] });
    let (status, after) = call(&app, "POST", &format!("/sessions/{id}/actions"), Some(merge)).await;
    assert_eq!(status, StatusCode::OK, "{after}");
    assert!(!after["problem"].as_str().unwrap().contains('Y'));

    let (status, undone) = call(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(undone["hash"], before["hash"]);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (_, redone) = call(&app, "POST", &format!("/sessions/{id}/redo"), None).await;
    assert_eq!(redone["hash"], after["hash"]);

    let (_, h) = call(&app, "GET", &format!("/sessions/{id}/history"), None).await;
    let entries = h["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[1]["action"]["kind"], "merge");
    assert_eq!(entries[1]["action"]["hash"], after["hash"]);
}

#[tokio::test]
async fn busy_session_conflicts() {
    let state = AppState::new(None);
    let app = router(state.clone());
    let id = create(&app, BMM).await;
    let handle = state.session_handle(&id).unwrap();
    let guard = handle.lock().await;
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/actions"), Some(json!({ "kind": "re_black" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"]["code"], "conflict");
    drop(guard);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/actions"), Some(json!({ "kind": "re_black" }))).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn error_codes() {
    let app = router(AppState::new(None));
    let (status, v) = call(&app, "POST", "/sessions", Some(json!({ "problem": "delta: 3\nwhite:\nM O^3\nblack:\nO^3\n" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "parse_error");

    let (status, v) = call(&app, "GET", "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "not_found");

    let id = create(&app, MERGE).await;
    let bad = json!({ "kind": "merge", "side": "white", "pairs": [["X", "Y"]] });
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/actions"), Some(bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "unjustified_merge");

    let big = "delta: 2\nwhite:\nA B\nC D\nE F\nG A\nblack:\n[ABCDEFG]^2\n";
    let id = create(&app, big).await;
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/actions"), Some(json!({ "kind": "re_black" }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "budget_exceeded");
}

#[tokio::test]
async fn auto_bound_job() {
    let app = router(AppState::new(None));
    let id = create(&app, BMM).await;
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/autobound"), Some(json!({ "max_labels": 5 }))).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let job = v["job"].as_str().unwrap().to_string();
    let mut view = Value::Null;
    for _ in 0..600 {
        view = call(&app, "GET", &format!("/jobs/{job}"), None).await.1;
        if view["state"] != "running" {
            break;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    assert_eq!(view["state"], "done", "{view}");
    assert_eq!(view["result"]["bound"], 5);
    let cert: Certificate = serde_json::from_value(view["result"]["certificate"].clone()).unwrap();
    assert_eq!(verify_certificate(&cert, &ReLimits::default()).unwrap().bound, 5);

    let (status, v) = call(&app, "DELETE", &format!("/jobs/{job}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["state"], "done");
    let (status, _) = call(&app, "GET", "/jobs/j999", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn snapshots_replay() {
    let dir = std::env::temp_dir().join(format!("roundelim-snap-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let app = router(AppState::new(Some(dir.clone())));
    let id = create(&app, BMM).await;
    for kind in ["re_black", "re_white"] {
        let (status, _) = call(&app, "POST", &format!("/sessions/{id}/actions"), Some(json!({ "kind": kind }))).await;
        assert_eq!(status, StatusCode::OK);
    }
    let rename = json!({ "kind": "rename", "map": { "A": "Q" } });
    let (_, last) = call(&app, "POST", &format!("/sessions/{id}/actions"), Some(rename)).await;

    let text = std::fs::read_to_string(dir.join(format!("{id}.json"))).unwrap();
    let snap: Snapshot = serde_json::from_str(&text).unwrap();
    assert_eq!(snap.history.len(), 4);
    let s = Session::from_snapshot(&snap, &ReLimits::default()).unwrap();
    assert_eq!(s.view().hash, last["hash"].as_str().unwrap());
    assert_eq!(s.replay(&ReLimits::default()).unwrap(), None);
    let _ = std::fs::remove_dir_all(dir);
}
