//! Line-delimited JSON store shared by the replay backend and the cache.
//! One record per line: `{"key","model","prompt","params","completion"}`.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tidyup_promptkit::PromptText;

use crate::{
    cache_key, truncate_at_stop, BackendError, BackendFingerprint, CompletionBackend,
    CompletionRecord, CompletionSource, DecodingParams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreRecord {
    pub key: String,
    pub model: String,
    pub prompt: String,
    pub params: DecodingParams,
    pub completion: String,
}

impl StoreRecord {
    pub fn new(prompt: &str, params: &DecodingParams, completion: impl Into<String>) -> Self {
        Self {
            key: cache_key(prompt, params),
            model: params.model_id.clone(),
            prompt: prompt.to_string(),
            params: params.clone(),
            completion: completion.into(),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> BackendError {
    BackendError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parse store text. Every record's key must match the digest of its prompt
/// and params; later records with the same key replace earlier ones.
pub(crate) fn parse_store(
    text: &str,
    path: &Path,
) -> Result<HashMap<String, StoreRecord>, BackendError> {
    let mut index = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let store_err = |message: String| BackendError::Store {
            path: path.display().to_string(),
            line: i + 1,
            message,
        };
        let rec: StoreRecord = serde_json::from_str(line).map_err(|e| store_err(e.to_string()))?;
        let expected = cache_key(&rec.prompt, &rec.params);
        if rec.key != expected {
            return Err(store_err(format!(
                "key {} does not match prompt digest {expected}",
                rec.key
            )));
        }
        index.insert(rec.key.clone(), rec);
    }
    Ok(index)
}

pub fn load_store(path: impl AsRef<Path>) -> Result<HashMap<String, StoreRecord>, BackendError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_store(&text, path)
}

/// Append one record as a single line under an exclusive advisory lock.
pub fn append_record(path: impl AsRef<Path>, rec: &StoreRecord) -> Result<(), BackendError> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut line = serde_json::to_string(rec).expect("record serializes");
    line.push('\n');
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_err(path, e))?;
    file.lock().map_err(|e| io_err(path, e))?;
    let res = file.write_all(line.as_bytes()).and_then(|_| file.flush());
    let _ = file.unlock();
    res.map_err(|e| io_err(path, e))
}

/// Answers prompts from a recorded store. The index is immutable after load,
/// so lookups need no locking.
pub struct ReplayBackend {
    path: PathBuf,
    index: Arc<HashMap<String, StoreRecord>>,
    model_id: String,
    hash: String,
}

impl ReplayBackend {
    pub fn open(path: impl AsRef<Path>, model_id: impl Into<String>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| BackendError::Store {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        let index = parse_store(&text, path)?;
        Ok(Self {
            path: path.to_path_buf(),
            index: Arc::new(index),
            model_id: model_id.into(),
            hash: hex::encode(Sha256::digest(&bytes)),
        })
    }

    /// An empty store; every lookup misses.
    pub fn empty(model_id: impl Into<String>) -> Self {
        Self {
            path: PathBuf::new(),
            index: Arc::default(),
            model_id: model_id.into(),
            hash: hex::encode(Sha256::digest(b"")),
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl CompletionBackend for ReplayBackend {
    fn complete(
        &self,
        prompt: &PromptText,
        params: &DecodingParams,
    ) -> Result<CompletionRecord, BackendError> {
        let start = Instant::now();
        let key = cache_key(prompt.as_str(), params);
        let rec = self
            .index
            .get(&key)
            .ok_or(BackendError::MissingReplayEntry { key })?;
        Ok(CompletionRecord {
            prompt: prompt.clone(),
            params: params.clone(),
            completion: truncate_at_stop(&rec.completion, &params.stop_sequences),
            source: CompletionSource::Replay,
            latency: start.elapsed(),
        })
    }

    fn fingerprint(&self) -> BackendFingerprint {
        BackendFingerprint {
            kind: "replay".into(),
            model_id: self.model_id.clone(),
            replay_hash: Some(self.hash.clone()),
        }
    }
}
