//! A uniform completion interface over a remote HTTP endpoint, a recorded
//! replay store, and a write-through cache, so every experiment can be rerun
//! offline.

mod cache;
mod config;
mod http;
mod sequence;
mod store;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tidyup_promptkit::PromptText;

pub use cache::{CachedBackend, CACHE_FILE};
pub use config::{build_backend, BackendConfig, BackendMode, DEFAULT_API_KEY_ENV};
pub use http::{HttpBackend, RetryPolicy};
pub use sequence::{store_lines, SequenceBackend};
pub use store::{append_record, load_store, ReplayBackend, StoreRecord};

pub const DEFAULT_MODEL: &str = "text-davinci-003";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingParams {
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop_sequences: Vec<String>,
}

impl Default for DecodingParams {
    fn default() -> Self {
        Self {
            model_id: DEFAULT_MODEL.to_string(),
            temperature: 0.0,
            max_tokens: 256,
            stop_sequences: vec!["\n\n".to_string()],
        }
    }
}

impl DecodingParams {
    pub fn for_model(model_id: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionSource {
    Http,
    Replay,
    Cache,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRecord {
    pub prompt: PromptText,
    pub params: DecodingParams,
    pub completion: String,
    pub source: CompletionSource,
    pub latency: Duration,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited (retry after {retry_after:?})")]
    RateLimited { retry_after: Option<Duration> },
    #[error("no replay entry for prompt key {key}")]
    MissingReplayEntry { key: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("{path}:{line}: {message}")]
    Store {
        path: String,
        line: usize,
        message: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration error: {0}")]
    Config(String),
}

/// Identifies the model and recorded data behind a backend, for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendFingerprint {
    pub kind: String,
    pub model_id: String,
    /// SHA-256 of the replay store bytes, when replaying.
    pub replay_hash: Option<String>,
}

pub trait CompletionBackend: Send + Sync {
    fn complete(
        &self,
        prompt: &PromptText,
        params: &DecodingParams,
    ) -> Result<CompletionRecord, BackendError>;

    fn fingerprint(&self) -> BackendFingerprint;
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for Box<B> {
    fn complete(
        &self,
        prompt: &PromptText,
        params: &DecodingParams,
    ) -> Result<CompletionRecord, BackendError> {
        (**self).complete(prompt, params)
    }

    fn fingerprint(&self) -> BackendFingerprint {
        (**self).fingerprint()
    }
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for std::sync::Arc<B> {
    fn complete(
        &self,
        prompt: &PromptText,
        params: &DecodingParams,
    ) -> Result<CompletionRecord, BackendError> {
        (**self).complete(prompt, params)
    }

    fn fingerprint(&self) -> BackendFingerprint {
        (**self).fingerprint()
    }
}

fn hash_field(hasher: &mut Sha256, bytes: &[u8]) {
    hasher.update((bytes.len() as u64).to_le_bytes());
    hasher.update(bytes);
}

/// SHA-256 over the prompt bytes and every decoding parameter, each field
/// length-prefixed so distinct inputs never encode identically.
pub fn cache_key(prompt: &str, params: &DecodingParams) -> String {
    let mut hasher = Sha256::new();
    hash_field(&mut hasher, prompt.as_bytes());
    hash_field(&mut hasher, params.model_id.as_bytes());
    hash_field(&mut hasher, &params.temperature.to_bits().to_le_bytes());
    hash_field(&mut hasher, &params.max_tokens.to_le_bytes());
    hasher.update((params.stop_sequences.len() as u64).to_le_bytes());
    for s in &params.stop_sequences {
        hash_field(&mut hasher, s.as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Cut `text` at the earliest occurrence of any stop sequence.
pub fn truncate_at_stop(text: &str, stops: &[String]) -> String {
    let cut = stops
        .iter()
        .filter(|s| !s.is_empty())
        .filter_map(|s| text.find(s.as_str()))
        .min()
        .unwrap_or(text.len());
    text[..cut].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_is_stable_and_sensitive() {
        let p = DecodingParams::default();
        let a = cache_key("prompt", &p);
        assert_eq!(a, cache_key("prompt", &p));
        assert_eq!(a.len(), 64);
        assert!(a.chars().all(|c| c.is_ascii_hexdigit()));

        let other_model = DecodingParams::for_model("PaLM 540B");
        assert_ne!(a, cache_key("prompt", &other_model));
        let mut hot = p.clone();
        hot.temperature = 0.7;
        assert_ne!(a, cache_key("prompt", &hot));
        let mut stops = p.clone();
        stops.stop_sequences = vec!["\n".into(), "\n".into()];
        assert_ne!(a, cache_key("prompt", &stops));
        assert_ne!(a, cache_key("prompt ", &p));
    }

    #[test]
    fn stop_truncation() {
        let stops = vec!["\n\n".to_string(), "END".to_string()];
        assert_eq!(truncate_at_stop("a\nb\n\nc", &stops), "a\nb");
        assert_eq!(truncate_at_stop("xENDy\n\n", &stops), "x");
        assert_eq!(truncate_at_stop("plain", &stops), "plain");
        assert_eq!(truncate_at_stop("plain", &[String::new()]), "plain");
    }
}
