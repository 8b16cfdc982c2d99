mod common;

use std::path::Path;
use std::sync::atomic::Ordering;
use std::time::Duration;

use base64::Engine;
use common::mock::{completion, serve, Reply};
use tempfile::TempDir;
use traceforge::harness::{
    parse_completion, query_model, run_eval, EvalOptions, HttpResponder, ModelEndpointConfig, OracleResponder,
};
use traceforge::io::{encode_png, read_jsonl, write_png};
use traceforge_core::raster::CanvasImage;
use traceforge_core::task::{DatasetConfig, DatasetManifest, ModelResponse, TaskRecord};

fn image_dir() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_png(&CanvasImage::new(8, 6), &dir.path().join("a.png")).unwrap();
    dir
}

fn manifest(n: usize) -> DatasetManifest {
    let tasks = (0..n)
        .map(|i| {
            let mut t = TaskRecord::empty(&format!("t{i:03}"));
            t.image = "a.png".into();
            t.prompt = format!("prompt {i}");
            t
        })
        .collect();
    DatasetManifest::new(DatasetConfig::default(), tasks)
}

fn cfg(url: &str) -> ModelEndpointConfig {
    ModelEndpointConfig { backoff_ms: 1, timeout_secs: 10.0, ..ModelEndpointConfig::new(url, "test-model") }
}

fn opts(dir: &Path, runs: u32, limit: Option<usize>) -> EvalOptions {
    EvalOptions { runs, concurrency: 8, image_dir: dir.to_path_buf(), limit }
}

#[test]
fn request_shape_and_auth() {
    let dir = image_dir();
    let png = encode_png(&CanvasImage::new(8, 6)).unwrap();
    let server = serve(|req, _| {
        assert_eq!(req.method, "POST");
        assert_eq!(req.path, "/v1/chat/completions");
        let auth = req.headers.get("authorization").cloned().unwrap_or_default();
        let body = req.json();
        let url = body["messages"][0]["content"][0]["image_url"]["url"].as_str().unwrap().to_string();
        let text = body["messages"][0]["content"][1]["text"].as_str().unwrap();
        Reply::ok(completion(&format!("{auth}|{text}|{}|{url}", body["model"].as_str().unwrap())))
    });
    std::env::set_var("TRACEFORGE_HARNESS_TEST_KEY", "sekrit");
    let with_key = ModelEndpointConfig { api_key_env: "TRACEFORGE_HARNESS_TEST_KEY".into(), ..cfg(&server.url) };
    let r = query_model(&with_key, &dir.path().join("a.png"), "trace it");
    let raw = r.raw.unwrap();
    let parts: Vec<&str> = raw.splitn(4, '|').collect();
    assert_eq!(&parts[..3], ["Bearer sekrit", "trace it", "test-model"]);
    let b64 = base64::engine::general_purpose::STANDARD.encode(&png);
    assert_eq!(parts[3], format!("data:image/png;base64,{b64}"));
    assert_eq!(r.completion_tokens, Some(7));
    assert!(r.error.is_none());

    let no_key = ModelEndpointConfig { api_key_env: "TRACEFORGE_HARNESS_UNSET_KEY".into(), ..cfg(&server.url) };
    let raw = query_model(&no_key, &dir.path().join("a.png"), "x").raw.unwrap();
    assert!(raw.starts_with("|x|"));
}

#[test]
fn rate_limits_are_retried() {
    let dir = image_dir();
    let server = serve(|_, n| if n < 2 { Reply::status(429) } else { Reply::ok(completion("red end")) });
    let r = query_model(&cfg(&server.url), &dir.path().join("a.png"), "p");
    assert_eq!(r.raw.as_deref(), Some("red end"));
    assert_eq!(server.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn server_errors_exhaust_retries() {
    let dir = image_dir();
    let server = serve(|_, _| Reply::status(503));
    let c = ModelEndpointConfig { retries: 2, ..cfg(&server.url) };
    let r = query_model(&c, &dir.path().join("a.png"), "p");
    assert!(r.raw.is_none());
    assert!(r.error.unwrap().contains("3 attempts"));
    assert_eq!(server.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let dir = image_dir();
    let server = serve(|_, _| Reply::status(400));
    let r = query_model(&cfg(&server.url), &dir.path().join("a.png"), "p");
    assert!(r.error.unwrap().contains("400"));
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn slow_server_times_out() {
    let dir = image_dir();
    let server = serve(|_, _| Reply { delay: Duration::from_millis(1500), ..Reply::ok(completion("late")) });
    let c = ModelEndpointConfig { timeout_secs: 0.2, retries: 0, ..cfg(&server.url) };
    let r = query_model(&c, &dir.path().join("a.png"), "p");
    assert!(r.raw.is_none());
    assert!(r.error.unwrap().contains("timed out"));
}

#[test]
fn missing_image_is_an_error_response() {
    let dir = image_dir();
    let r = query_model(&cfg("http://127.0.0.1:9/v1"), &dir.path().join("nope.png"), "p");
    assert!(r.error.unwrap().contains("cannot read image"));
}

#[test]
fn completion_variants_parse() {
    let mut r = ModelResponse::default();
    let body = serde_json::json!({
        "choices": [{"message": {"content": [{"type": "text", "text": "red, "}, {"type": "text", "text": "end"}],
                                 "reasoning_content": "hmm"}}],
        "usage": {"completion_tokens": 30, "completion_tokens_details": {"reasoning_tokens": 20}},
    });
    parse_completion(&body, &mut r);
    assert_eq!(r.raw.as_deref(), Some("red, end"));
    assert_eq!(r.reasoning.as_deref(), Some("hmm"));
    assert_eq!((r.completion_tokens, r.reasoning_tokens), (Some(30), Some(20)));
    let mut r = ModelResponse::default();
    parse_completion(&serde_json::json!({"choices": []}), &mut r);
    assert!(r.error.is_some());
}

#[test]
fn concurrency_is_bounded() {
    let dir = image_dir();
    let server = serve(|_, _| Reply { delay: Duration::from_millis(40), ..Reply::ok(completion("end")) });
    let log = dir.path().join("log.jsonl");
    let responder = HttpResponder::new(cfg(&server.url));
    let s = run_eval(&manifest(40), &responder, &opts(dir.path(), 1, None), &log).unwrap();
    assert_eq!(s.queried, 40);
    let peak = server.max_in_flight.load(Ordering::SeqCst);
    assert!((2..=8).contains(&peak), "peak {peak}");
}

#[test]
fn interrupted_runs_resume() {
    let dir = image_dir();
    let log = dir.path().join("log.jsonl");
    let m = manifest(10);
    let first = run_eval(&m, &OracleResponder, &opts(dir.path(), 3, Some(15)), &log).unwrap();
    assert_eq!((first.queried, first.skipped), (15, 0));
    let second = run_eval(&m, &OracleResponder, &opts(dir.path(), 3, Some(15)), &log).unwrap();
    assert_eq!((second.queried, second.skipped), (15, 15));
    let third = run_eval(&m, &OracleResponder, &opts(dir.path(), 3, None), &log).unwrap();
    assert_eq!((third.queried, third.skipped), (0, 30));

    let rows: Vec<ModelResponse> = read_jsonl(&log).unwrap();
    let mut keys: Vec<_> = rows.iter().map(|r| (r.task_id.clone(), r.run)).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 30);
    assert!(rows.iter().all(|r| (1..=3).contains(&r.run)));
}

#[test]
fn partial_last_line_is_rewritten() {
    let dir = image_dir();
    let log = dir.path().join("log.jsonl");
    let m = manifest(3);
    run_eval(&m, &OracleResponder, &opts(dir.path(), 1, Some(2)), &log).unwrap();
    let mut bytes = std::fs::read(&log).unwrap();
    bytes.extend_from_slice(b"{\"task_id\": \"t00");
    std::fs::write(&log, &bytes).unwrap();
    let s = run_eval(&m, &OracleResponder, &opts(dir.path(), 1, None), &log).unwrap();
    assert_eq!((s.queried, s.skipped), (1, 2));
    let text = std::fs::read_to_string(&log).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| serde_json::from_str::<ModelResponse>(l).is_ok()));
}
