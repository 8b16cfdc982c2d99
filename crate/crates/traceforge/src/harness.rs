//! Model querying over an OpenAI-compatible chat-completions endpoint and
//! resumable multi-run evaluation.

use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use traceforge_core::task::{DatasetManifest, ModelResponse, TaskRecord};
use traceforge_core::tracer::{greedy_tracer, oracle_tracer, GREEDY_MODEL, ORACLE_MODEL};

use crate::io::{read_jsonl, truncate_partial_line, IoError};

pub const DEFAULT_API_KEY_ENV: &str = "MODEL_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpointConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the key; the key itself is
    /// never stored.
    pub api_key_env: String,
    pub concurrency: usize,
    pub timeout_secs: f64,
    pub retries: u32,
    pub backoff_ms: u64,
    pub temperature: f64,
    pub reasoning_effort: Option<String>,
}

impl ModelEndpointConfig {
    pub fn new(base_url: &str, model: &str) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            concurrency: 8,
            timeout_secs: 120.0,
            retries: 4,
            backoff_ms: 500,
            temperature: 1.0,
            reasoning_effort: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.concurrency == 0 {
            return Err("concurrency must be at least 1".into());
        }
        if !(self.timeout_secs > 0.0) {
            return Err("timeout must be positive".into());
        }
        Ok(())
    }

    fn url(&self) -> String {
        let base = self.base_url.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.into()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

pub fn request_body(cfg: &ModelEndpointConfig, image_png: &[u8], prompt: &str) -> Value {
    let b64 = base64::engine::general_purpose::STANDARD.encode(image_png);
    let mut body = json!({
        "model": cfg.model,
        "temperature": cfg.temperature,
        "messages": [{
            "role": "user",
            "content": [
                {"type": "image_url", "image_url": {"url": format!("data:image/png;base64,{b64}")}},
                {"type": "text", "text": prompt},
            ],
        }],
    });
    if let Some(e) = &cfg.reasoning_effort {
        body["reasoning_effort"] = json!(e);
    }
    body
}

fn text_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => {
            let s: Vec<&str> = parts
                .iter()
                .filter_map(|p| p.get("text").and_then(Value::as_str))
                .collect();
            (!s.is_empty()).then(|| s.join(""))
        }
        _ => None,
    }
}

/// Fills answer, reasoning trace and token counts from a chat-completions body.
pub fn parse_completion(body: &Value, resp: &mut ModelResponse) {
    let msg = &body["choices"][0]["message"];
    resp.raw = text_of(&msg["content"]);
    resp.reasoning = ["reasoning_content", "reasoning", "thinking"]
        .iter()
        .find_map(|k| text_of(&msg[*k]));
    let usage = &body["usage"];
    resp.completion_tokens = usage["completion_tokens"].as_u64();
    resp.reasoning_tokens = usage["completion_tokens_details"]["reasoning_tokens"]
        .as_u64()
        .or_else(|| usage["reasoning_tokens"].as_u64());
    if resp.raw.is_none() {
        resp.error = Some("response has no message content".into());
    }
}

fn blocking_client(cfg: &ModelEndpointConfig) -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs_f64(cfg.timeout_secs))
        .build()
        .expect("HTTP client builds with static settings")
}

fn query_with(client: &reqwest::blocking::Client, cfg: &ModelEndpointConfig, image: &Path, prompt: &str) -> ModelResponse {
    let start = Instant::now();
    let mut resp = ModelResponse { model: cfg.model.clone(), ..ModelResponse::default() };
    let finish = |mut r: ModelResponse| {
        r.latency_ms = start.elapsed().as_millis() as u64;
        r
    };
    let png = match fs::read(image) {
        Ok(b) => b,
        Err(e) => {
            resp.error = Some(format!("cannot read image {}: {e}", image.display()));
            return finish(resp);
        }
    };
    let body = request_body(cfg, &png, prompt);
    let key = std::env::var(&cfg.api_key_env).ok();
    let mut last_error = String::new();
    for attempt in 0..=cfg.retries {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(16))));
        }
        let mut req = client.post(cfg.url()).json(&body);
        if let Some(k) = &key {
            req = req.bearer_auth(k);
        }
        match req.send() {
            Ok(r) => {
                let status = r.status();
                if status.is_success() {
                    match r.json::<Value>() {
                        Ok(v) => {
                            parse_completion(&v, &mut resp);
                            return finish(resp);
                        }
                        Err(e) => last_error = format!("invalid response body: {e}"),
                    }
                } else if status.as_u16() == 429 || status.is_server_error() {
                    last_error = format!("HTTP {status}");
                } else {
                    resp.error = Some(format!("HTTP {status}"));
                    return finish(resp);
                }
            }
            Err(e) => {
                last_error = if e.is_timeout() {
                    "request timed out".into()
                } else {
                    format!("transport error: {}", e.without_url())
                };
            }
        }
    }
    resp.error = Some(format!("gave up after {} attempts: {last_error}", cfg.retries + 1));
    finish(resp)
}

/// One chat-completions request (with retries). Never panics on network
/// failure; exhausted retries produce a response carrying `error`.
pub fn query_model(cfg: &ModelEndpointConfig, image: &Path, prompt: &str) -> ModelResponse {
    query_with(&blocking_client(cfg), cfg, image, prompt)
}

/// Produces one response for a `(task, run)` pair.
pub trait Responder: Sync {
    fn model_id(&self) -> &str;
    fn respond(&self, task: &TaskRecord, image: &Path, run: u32) -> ModelResponse;
}

pub struct HttpResponder {
    cfg: ModelEndpointConfig,
    client: reqwest::blocking::Client,
}

impl HttpResponder {
    pub fn new(cfg: ModelEndpointConfig) -> Self {
        let client = blocking_client(&cfg);
        Self { cfg, client }
    }
}

impl Responder for HttpResponder {
    fn model_id(&self) -> &str {
        &self.cfg.model
    }

    fn respond(&self, task: &TaskRecord, image: &Path, run: u32) -> ModelResponse {
        let mut r = query_with(&self.client, &self.cfg, image, &task.prompt);
        r.task_id = task.task_id.clone();
        r.run = run;
        r
    }
}

pub struct OracleResponder;

impl Responder for OracleResponder {
    fn model_id(&self) -> &str {
        ORACLE_MODEL
    }

    fn respond(&self, task: &TaskRecord, _image: &Path, run: u32) -> ModelResponse {
        oracle_tracer(task, run)
    }
}

pub struct GreedyResponder;

impl Responder for GreedyResponder {
    fn model_id(&self) -> &str {
        GREEDY_MODEL
    }

    fn respond(&self, task: &TaskRecord, _image: &Path, run: u32) -> ModelResponse {
        greedy_tracer(task, run)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalSummary {
    pub queried: usize,
    pub skipped: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub runs: u32,
    pub concurrency: usize,
    /// Directory holding the task images.
    pub image_dir: PathBuf,
    /// Stop after this many new responses (for tests and partial runs).
    pub limit: Option<usize>,
}

/// Queries every `(task, run)` pair missing from `log` and appends one JSON
/// line per response.
///
/// Pairs already present for this model are skipped, so an interrupted run
/// resumes where it stopped. A partially written last line is dropped first.
/// Workers share a counter; a single writer appends lines.
pub fn run_eval(
    manifest: &DatasetManifest,
    responder: &dyn Responder,
    opts: &EvalOptions,
    log: &Path,
) -> Result<EvalSummary, IoError> {
    truncate_partial_line(log)?;
    let model = responder.model_id().to_string();
    let done: BTreeSet<(String, u32)> = read_jsonl::<ModelResponse>(log)?
        .into_iter()
        .filter(|r| r.model == model)
        .map(|r| (r.task_id, r.run))
        .collect();
    let mut pending = Vec::new();
    for run in 1..=opts.runs {
        for t in &manifest.tasks {
            if !done.contains(&(t.task_id.clone(), run)) {
                pending.push((t, run));
            }
        }
    }
    let skipped = manifest.tasks.len() * opts.runs as usize - pending.len();
    if let Some(l) = opts.limit {
        pending.truncate(l);
    }
    let io_err = |source| IoError::Io { path: log.to_path_buf(), source };
    let mut file = OpenOptions::new().create(true).append(true).open(log).map_err(io_err)?;
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<ModelResponse>();
    let workers = opts.concurrency.max(1).min(pending.len().max(1));
    let mut failed = 0;
    let mut written = 0;
    std::thread::scope(|s| -> Result<(), IoError> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (pending, next, model) = (&pending, &next, &model);
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((task, run)) = pending.get(i) else { break };
                let mut r = responder.respond(task, &opts.image_dir.join(&task.image), *run);
                r.task_id = task.task_id.clone();
                r.run = *run;
                r.model = model.clone();
                if tx.send(r).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for r in rx {
            let mut line = serde_json::to_string(&r).expect("responses serialize");
            line.push('\n');
            file.write_all(line.as_bytes()).map_err(io_err)?;
            file.flush().map_err(io_err)?;
            failed += r.error.is_some() as usize;
            written += 1;
        }
        Ok(())
    })?;
    Ok(EvalSummary { queried: written, skipped, failed })
}
