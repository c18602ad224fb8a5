use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::{BackendError, CachedBackend, CompletionBackend, HttpBackend, ReplayBackend, RetryPolicy};

pub const DEFAULT_API_KEY_ENV: &str = "LLM_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendMode {
    Http,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub mode: BackendMode,
    #[serde(default)]
    pub endpoint_url: Option<String>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub replay_path: Option<PathBuf>,
    #[serde(default = "default_model")]
    pub model_id: String,
    /// Environment variable holding the API credential.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default)]
    pub retry_base_ms: Option<u64>,
}

fn default_model() -> String {
    crate::DEFAULT_MODEL.to_string()
}

fn default_key_env() -> String {
    DEFAULT_API_KEY_ENV.to_string()
}

impl BackendConfig {
    pub fn replay(path: impl Into<PathBuf>) -> Self {
        Self {
            mode: BackendMode::Replay,
            endpoint_url: None,
            cache_dir: None,
            replay_path: Some(path.into()),
            model_id: default_model(),
            api_key_env: default_key_env(),
            retry_base_ms: None,
        }
    }

    pub fn http(endpoint: impl Into<String>) -> Self {
        Self {
            mode: BackendMode::Http,
            endpoint_url: Some(endpoint.into()),
            replay_path: None,
            ..Self::replay(PathBuf::new())
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| BackendError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        match self.mode {
            BackendMode::Http if self.endpoint_url.is_none() => Err(BackendError::Config(
                "http mode requires endpoint_url".into(),
            )),
            BackendMode::Replay if self.replay_path.is_none() => Err(BackendError::Config(
                "replay mode requires replay_path".into(),
            )),
            _ => Ok(()),
        }
    }

    fn retry(&self) -> RetryPolicy {
        let mut policy = RetryPolicy::default();
        if let Some(ms) = self.retry_base_ms {
            policy.base_delay = Duration::from_millis(ms);
        }
        policy
    }
}

/// Construct the backend a config describes. An HTTP backend is wrapped in
/// the write-through cache when `cache_dir` is set.
pub fn build_backend(cfg: &BackendConfig) -> Result<Box<dyn CompletionBackend>, BackendError> {
    cfg.validate()?;
    match cfg.mode {
        BackendMode::Replay => {
            let path = cfg.replay_path.as_ref().expect("validated");
            Ok(Box::new(ReplayBackend::open(path, cfg.model_id.clone())?))
        }
        BackendMode::Http => {
            let key = std::env::var(&cfg.api_key_env).ok();
            let http = HttpBackend::new(
                cfg.endpoint_url.clone().expect("validated"),
                key,
                cfg.model_id.clone(),
                cfg.retry(),
            )?;
            match &cfg.cache_dir {
                Some(dir) => Ok(Box::new(CachedBackend::open(http, dir)?)),
                None => Ok(Box::new(http)),
            }
        }
    }
}
