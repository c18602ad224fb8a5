use std::thread;
use std::time::{Duration, Instant};

use log::warn;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use tidyup_promptkit::PromptText;

use crate::{
    truncate_at_stop, BackendError, BackendFingerprint, CompletionBackend, CompletionRecord,
    CompletionSource, DecodingParams,
};

/// Retries apply to transport failures, 5xx, and 429 only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    /// Delay before attempt `n + 1` (`n` starts at 1).
    pub fn backoff(&self, n: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(n.saturating_sub(1))
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
    stop: &'a [String],
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

/// Client for a completion-style JSON endpoint.
pub struct HttpBackend {
    client: Client,
    endpoint: String,
    api_key: Option<String>,
    model_id: String,
    retry: RetryPolicy,
}

enum Attempt {
    Done(String),
    Retry {
        err: BackendError,
        wait: Option<Duration>,
    },
    Fatal(BackendError),
}

fn retry_after(resp: &reqwest::blocking::Response) -> Option<Duration> {
    resp.headers()
        .get(reqwest::header::RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse::<u64>()
        .ok()
        .map(Duration::from_secs)
}

impl HttpBackend {
    pub fn new(
        endpoint: impl Into<String>,
        api_key: Option<String>,
        model_id: impl Into<String>,
        retry: RetryPolicy,
    ) -> Result<Self, BackendError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: endpoint.into(),
            api_key,
            model_id: model_id.into(),
            retry,
        })
    }

    fn attempt(&self, prompt: &str, params: &DecodingParams) -> Attempt {
        let body = CompletionRequest {
            model: &params.model_id,
            prompt,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            stop: &params.stop_sequences,
        };
        let mut req = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Retry {
                    err: BackendError::Transport(e.to_string()),
                    wait: None,
                }
            }
        };
        let status = resp.status();
        if status == StatusCode::TOO_MANY_REQUESTS {
            let wait = retry_after(&resp);
            return Attempt::Retry {
                err: BackendError::RateLimited { retry_after: wait },
                wait,
            };
        }
        if status.is_server_error() {
            return Attempt::Retry {
                err: BackendError::Transport(format!("server returned {status}")),
                wait: None,
            };
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Attempt::Fatal(BackendError::Transport(format!(
                "server returned {status}: {text}"
            )));
        }
        match resp.json::<CompletionResponse>() {
            Ok(r) => match r.choices.into_iter().next() {
                Some(c) => Attempt::Done(c.text),
                None => Attempt::Fatal(BackendError::MalformedResponse("no choices".into())),
            },
            Err(e) => Attempt::Fatal(BackendError::MalformedResponse(e.to_string())),
        }
    }
}

impl CompletionBackend for HttpBackend {
    fn complete(
        &self,
        prompt: &PromptText,
        params: &DecodingParams,
    ) -> Result<CompletionRecord, BackendError> {
        let start = Instant::now();
        let attempts = self.retry.attempts.max(1);
        let mut n = 1;
        let text = loop {
            match self.attempt(prompt.as_str(), params) {
                Attempt::Done(text) => break text,
                Attempt::Fatal(err) => return Err(err),
                Attempt::Retry { err, wait } => {
                    if n >= attempts {
                        return Err(err);
                    }
                    let delay = wait.unwrap_or_else(|| self.retry.backoff(n));
                    warn!("attempt {n}/{attempts} failed ({err}); retrying in {delay:?}");
                    thread::sleep(delay);
                    n += 1;
                }
            }
        };
        Ok(CompletionRecord {
            prompt: prompt.clone(),
            params: params.clone(),
            completion: truncate_at_stop(&text, &params.stop_sequences),
            source: CompletionSource::Http,
            latency: start.elapsed(),
        })
    }

    fn fingerprint(&self) -> BackendFingerprint {
        BackendFingerprint {
            kind: "http".into(),
            model_id: self.model_id.clone(),
            replay_hash: None,
        }
    }
}
