mod common;

use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::*;
use hypograph_service::gateway::{Gateway, Transport, TransportError};
use hypograph_service::http::{router, AppState};

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn json_of(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn assert_error_shape(body: &str, code: &str) {
    let v = json_of(body);
    let obj = v.as_object().unwrap();
    assert_eq!(obj.len(), 3, "{body}");
    assert_eq!(v["code"], code);
    assert!(!v["message"].as_str().unwrap().is_empty());
    assert!(!v["trace_id"].as_str().unwrap().is_empty());
}

fn app(dir: &std::path::Path, trained: bool) -> Router {
    let cfg = session_config(dir);
    if trained {
        train_checkpoint(&cfg);
    }
    router(AppState::new(Arc::new(engine(resources(&cfg), &cfg.log_dir))))
}

async fn create(app: &Router) -> String {
    let (status, body) = call(app, "POST", "/api/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
    json_of(&body)["session_id"].as_str().unwrap().to_string()
}

async fn send(app: &Router, id: &str, text: &str) -> (StatusCode, String) {
    call(app, "POST", &format!("/api/sessions/{id}/message"), Some(&json!({ "text": text }).to_string())).await
}

#[tokio::test]
async fn health_and_unknown_routes() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), false);
    let (status, body) = call(&app, "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&body), json!({"status": "ok"}));
    let (status, body) = call(&app, "GET", "/api/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "not_found");
}

#[tokio::test]
async fn unknown_session_is_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), false);
    let (status, body) = send(&app, "nope", "hello").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "not_found");
    let (status, body) = call(&app, "GET", "/api/sessions/nope/log", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "not_found");
    let (status, body) = call(&app, "GET", "/api/predictions/0123/explanation", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "not_found");
}

#[tokio::test]
async fn session_lifecycle_logs_before_replying() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), false);
    let id = create(&app).await;
    assert_eq!(id, "s1");

    let (status, body) = send(&app, &id, "query \"Which drugs treat Arrhythmogenic Right Ventricular Dysplasia?\"").await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let reply = json_of(&body);
    assert_eq!(reply["command"], "query");
    assert!(reply["answer_text"].as_str().unwrap().starts_with("[Querying knowledge graph]"));
    assert_eq!(reply["evidence"][0]["kind"], "cypher");

    let (status, log) = call(&app, "GET", &format!("/api/sessions/{id}/log"), None).await;
    assert_eq!(status, StatusCode::OK);
    let records: Vec<Value> = log.lines().map(json_of).collect();
    assert_eq!(records[0]["type"], "session_start");
    let turns: Vec<&Value> = records.iter().filter(|r| r["type"] == "turn").collect();
    assert_eq!(turns.len(), 1);
    assert_eq!(turns[0]["response"], reply);
    let digests: Vec<&Value> = records.iter().filter(|r| r["type"] == "exchange").map(|r| &r["output_sha256"]).collect();
    let traced: Vec<&Value> = reply["agent_trace"].as_array().unwrap().iter().map(|t| &t["output_sha256"]).collect();
    assert_eq!(digests, traced);
}

#[tokio::test]
async fn malformed_and_rejected_messages() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), false);
    let id = create(&app).await;
    let uri = format!("/api/sessions/{id}/message");
    let (status, body) = call(&app, "POST", &uri, Some("{\"txt\": 1}")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "bad_request");
    let (status, body) = call(&app, "POST", &uri, Some("not json")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "bad_request");

    let (status, body) = send(&app, &id, "search").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "bad_request");
    assert_eq!(json_of(&body)["trace_id"], "s1-1");
    let (status, body) = send(&app, &id, "predict drugs for ACM").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(json_of(&body)["message"].as_str().unwrap().contains("hypograph train"));
}

/// Answers like an Ollama server after a delay, or refuses.
struct ScriptedTransport {
    delay: Duration,
    up: bool,
}

impl Transport for ScriptedTransport {
    fn post_json(&self, _: &str, _: Option<&str>, _: &Value) -> Result<Value, TransportError> {
        std::thread::sleep(self.delay);
        if self.up {
            Ok(json!({"message": {"role": "assistant", "content": "slow answer"}}))
        } else {
            Err(TransportError::Unreachable("connection refused".into()))
        }
    }
}

fn app_with_remote_reasoning(dir: &std::path::Path, transport: ScriptedTransport) -> Router {
    let cfg = session_config(dir);
    let mut res = resources(&cfg);
    let mut agents = Gateway::load_config(&cfg.agents).unwrap();
    agents.insert(
        hypograph_service::gateway::AgentName::Reasoning,
        serde_json::from_value(json!({"backend": "local_http", "model": "llama3", "max_retries": 1})).unwrap(),
    );
    res.gateway = Gateway::new(agents, Arc::new(transport)).with_sleeper(Arc::new(NoSleep), Duration::from_millis(1));
    router(AppState::new(Arc::new(engine(res, &cfg.log_dir))))
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_message_on_busy_session_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with_remote_reasoning(dir.path(), ScriptedTransport { delay: Duration::from_millis(400), up: true });
    let id = create(&app).await;
    let other = create(&app).await;
    let first = {
        let app = app.clone();
        let id = id.clone();
        tokio::spawn(async move { send(&app, &id, "tell me about ACM").await })
    };
    tokio::time::sleep(Duration::from_millis(100)).await;
    let (status, body) = send(&app, &id, "and DCM?").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error_shape(&body, "bad_request");
    // Other sessions are not blocked.
    let (status, _) = send(&app, &other, "search").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, body) = first.await.unwrap();
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&body)["answer_text"], "slow answer");
    let (_, log) = call(&app, "GET", &format!("/api/sessions/{id}/log"), None).await;
    assert_eq!(log.lines().filter(|l| json_of(l)["type"] == "turn").count(), 1);
}

#[tokio::test]
async fn unreachable_backend_is_503() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with_remote_reasoning(dir.path(), ScriptedTransport { delay: Duration::ZERO, up: false });
    let id = create(&app).await;
    let (status, body) = send(&app, &id, "hello").await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_error_shape(&body, "backend_unavailable");
    let (status, _) = send(&app, &id, "summarize").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn explanation_endpoint_serves_prediction_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), true);
    let id = create(&app).await;
    let (status, body) = send(&app, &id, SESSION_SCRIPT[1].trim_start_matches("predict ")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&body)["command"], "chat");
    let (status, body) = send(&app, &id, SESSION_SCRIPT[1]).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let reply = json_of(&body);
    let preds: Vec<&Value> = reply["evidence"].as_array().unwrap().iter().filter(|e| e["kind"] == "prediction").collect();
    assert_eq!(preds.len(), 2);
    for p in preds {
        let pid = p["prediction_id"].as_str().unwrap();
        let (status, body) = call(&app, "GET", &format!("/api/predictions/{pid}/explanation"), None).await;
        assert_eq!(status, StatusCode::OK);
        let e = json_of(&body);
        assert_eq!(e["prediction_id"], pid);
        assert_eq!(e["predicted_probability"], p["probability"]);
        let dot = e["dot"].as_str().unwrap();
        assert!(dot.trim_start().starts_with("graph") || dot.trim_start().starts_with("digraph"), "{dot}");
        let on_disk = std::fs::read_to_string(dir.path().join("explanations").join(p["dot_file"].as_str().unwrap())).unwrap();
        assert_eq!(dot, on_disk);
        // Header, every scored edge, then the target edge itself.
        let tsv_rows = e["tsv"].as_str().unwrap().lines().count();
        assert_eq!(tsv_rows, e["edge_scores"].as_object().map_or_else(|| e["edge_scores"].as_array().unwrap().len(), |m| m.len()) + 2);
        assert_eq!(e["top_k"].as_array().unwrap().len(), 5);
    }
}

#[tokio::test]
async fn http_and_terminal_give_identical_responses() {
    let repl_dir = tempfile::tempdir().unwrap();
    let (_, log_path) = tokio::task::spawn_blocking({
        let p = repl_dir.path().to_path_buf();
        move || run_scripted_session(&p)
    })
    .await
    .unwrap();
    let repl_turns: Vec<Value> =
        read_log(&log_path).into_iter().filter(|r| r["type"] == "turn").map(|r| r["response"].clone()).collect();

    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), true);
    let id = create(&app).await;
    let mut http_turns = Vec::new();
    for line in SESSION_SCRIPT {
        let (status, body) = send(&app, &id, line).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        http_turns.push(json_of(&body));
    }
    assert_eq!(repl_turns.len(), 4);
    for (a, b) in repl_turns.iter().zip(&http_turns) {
        assert_eq!(serde_json::to_string(a).unwrap(), serde_json::to_string(b).unwrap());
    }
}
