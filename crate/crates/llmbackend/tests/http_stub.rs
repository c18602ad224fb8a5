//! Exercises the HTTP backend and the write-through cache against a local
//! stub completion server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use tidyup_llmbackend::*;
use tidyup_promptkit::{PromptKind, PromptText};

struct Stub {
    url: String,
    hits: Arc<AtomicUsize>,
    bodies: Arc<Mutex<Vec<String>>>,
}

/// Serve scripted `(status, body)` responses in order; the last one repeats.
fn stub(script: Vec<(u16, String)>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/completions", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let (h, b) = (hits.clone(), bodies.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            b.lock().unwrap().push(String::from_utf8(body).unwrap());
            let n = h.fetch_add(1, Ordering::SeqCst);
            let (status, payload) = script[n.min(script.len() - 1)].clone();
            let extra = if status == 429 { "Retry-After: 0\r\n" } else { "" };
            let resp = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\n{extra}Content-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
            let _ = stream.write_all(resp.as_bytes());
        }
    });
    Stub { url, hits, bodies }
}

fn ok(text: &str) -> (u16, String) {
    (200, serde_json::json!({"choices": [{"text": text}]}).to_string())
}

fn fast() -> RetryPolicy {
    RetryPolicy {
        attempts: 3,
        base_delay: Duration::from_millis(5),
    }
}

fn prompt() -> PromptText {
    PromptText::new(PromptKind::ReceptacleSummarization, "objects = [\"a\"]\n# Summary:")
}

#[test]
fn sends_wire_format_and_truncates_at_stop() {
    let s = stub(vec![ok(" Put a away.\n\nobjects = [")]);
    let backend = HttpBackend::new(&s.url, Some("k".into()), "m", fast()).unwrap();
    let rec = backend.complete(&prompt(), &DecodingParams::for_model("m")).unwrap();
    assert_eq!(rec.completion, " Put a away.");
    assert_eq!(rec.source, CompletionSource::Http);
    let body: serde_json::Value = serde_json::from_str(&s.bodies.lock().unwrap()[0]).unwrap();
    assert_eq!(body["model"], "m");
    assert_eq!(body["prompt"], "objects = [\"a\"]\n# Summary:");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["max_tokens"], 256);
    assert_eq!(body["stop"], serde_json::json!(["\n\n"]));
}

#[test]
fn retries_server_errors_then_succeeds() {
    let s = stub(vec![(500, "{}".into()), (503, "{}".into()), ok(" fine")]);
    let backend = HttpBackend::new(&s.url, None, "m", fast()).unwrap();
    let rec = backend.complete(&prompt(), &DecodingParams::default()).unwrap();
    assert_eq!(rec.completion, " fine");
    assert_eq!(s.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn gives_up_after_three_attempts() {
    let s = stub(vec![(502, "{}".into())]);
    let backend = HttpBackend::new(&s.url, None, "m", fast()).unwrap();
    let err = backend.complete(&prompt(), &DecodingParams::default()).unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)), "{err:?}");
    assert_eq!(s.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn rate_limit_is_surfaced() {
    let s = stub(vec![(429, "{}".into())]);
    let backend = HttpBackend::new(&s.url, None, "m", fast()).unwrap();
    let err = backend.complete(&prompt(), &DecodingParams::default()).unwrap_err();
    assert!(
        matches!(err, BackendError::RateLimited { retry_after: Some(d) } if d == Duration::ZERO),
        "{err:?}"
    );
}

#[test]
fn client_errors_are_not_retried() {
    let s = stub(vec![(400, "{\"error\": \"bad\"}".into())]);
    let backend = HttpBackend::new(&s.url, None, "m", fast()).unwrap();
    assert!(backend.complete(&prompt(), &DecodingParams::default()).is_err());
    assert_eq!(s.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn unreachable_endpoint_is_transport_error() {
    let backend = HttpBackend::new("http://127.0.0.1:9/v1", None, "m", fast()).unwrap();
    assert!(matches!(
        backend.complete(&prompt(), &DecodingParams::default()),
        Err(BackendError::Transport(_))
    ));
}

#[test]
fn cache_answers_second_call_and_feeds_replay() {
    let s = stub(vec![ok(" Put clothes away.")]);
    let dir = tempfile::tempdir().unwrap();
    let http = HttpBackend::new(&s.url, None, "m", fast()).unwrap();
    let cached = CachedBackend::open(http, dir.path()).unwrap();
    let params = DecodingParams::for_model("m");

    let first = cached.complete(&prompt(), &params).unwrap();
    let second = cached.complete(&prompt(), &params).unwrap();
    assert_eq!(first.source, CompletionSource::Http);
    assert_eq!(second.source, CompletionSource::Cache);
    assert_eq!(first.completion, second.completion);
    assert_eq!(s.hits.load(Ordering::SeqCst), 1);

    // a fresh cache over the same directory needs no network
    let reopened = CachedBackend::open(
        HttpBackend::new("http://127.0.0.1:9/v1", None, "m", fast()).unwrap(),
        dir.path(),
    )
    .unwrap();
    assert_eq!(reopened.complete(&prompt(), &params).unwrap().source, CompletionSource::Cache);

    // and the cache file is a replay store
    let replay = ReplayBackend::open(reopened.store_path(), "m").unwrap();
    let rec = replay.complete(&prompt(), &params).unwrap();
    assert_eq!(rec.completion, " Put clothes away.");
    assert_eq!(rec.source, CompletionSource::Replay);
}

#[test]
fn concurrent_cache_misses_store_once() {
    let s = stub(vec![ok(" same")]);
    let dir = tempfile::tempdir().unwrap();
    let http = HttpBackend::new(&s.url, None, "m", fast()).unwrap();
    let cached = Arc::new(CachedBackend::open(http, dir.path()).unwrap());
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let c = cached.clone();
            thread::spawn(move || {
                let p = PromptText::new(PromptKind::Commonsense, format!("prompt {}", i % 2));
                c.complete(&p, &DecodingParams::default()).unwrap().completion
            })
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), " same");
    }
    let store = load_store(cached.store_path()).unwrap();
    assert_eq!(store.len(), 2);
    let lines = std::fs::read_to_string(cached.store_path()).unwrap();
    assert!(lines.lines().count() >= 2);
}

#[test]
fn build_backend_from_config() {
    let s = stub(vec![ok(" x")]);
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = BackendConfig::http(&s.url);
    cfg.cache_dir = Some(dir.path().to_path_buf());
    cfg.retry_base_ms = Some(1);
    let backend = build_backend(&cfg).unwrap();
    assert_eq!(backend.complete(&prompt(), &DecodingParams::default()).unwrap().completion, " x");
    assert_eq!(backend.fingerprint().kind, "http");

    let replay = build_backend(&BackendConfig::replay(dir.path().join("completions.jsonl"))).unwrap();
    let fp = replay.fingerprint();
    assert_eq!(fp.kind, "replay");
    assert_eq!(fp.replay_hash.unwrap().len(), 64);
    assert!(build_backend(&BackendConfig::replay(dir.path().join("missing.jsonl"))).is_err());
}
