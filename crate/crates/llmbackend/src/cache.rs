use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::Instant;

use log::debug;
use tidyup_promptkit::PromptText;

use crate::store::{append_record, load_store};
use crate::{
    cache_key, truncate_at_stop, BackendError, BackendFingerprint, CompletionBackend,
    CompletionRecord, CompletionSource, DecodingParams, StoreRecord,
};

/// File name used inside a cache directory. The file is a valid replay store.
pub const CACHE_FILE: &str = "completions.jsonl";

/// Write-through cache around another backend. Hits are answered from the
/// store; misses go to the inner backend and are appended before returning.
pub struct CachedBackend<B> {
    inner: B,
    path: PathBuf,
    index: RwLock<HashMap<String, String>>,
    append: Mutex<()>,
}

impl<B: CompletionBackend> CachedBackend<B> {
    pub fn open(inner: B, cache_dir: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = cache_dir.as_ref().join(CACHE_FILE);
        let index = if path.exists() {
            load_store(&path)?
                .into_iter()
                .map(|(k, r)| (k, r.completion))
                .collect()
        } else {
            HashMap::new()
        };
        Ok(Self {
            inner,
            path,
            index: RwLock::new(index),
            append: Mutex::new(()),
        })
    }

    pub fn store_path(&self) -> &Path {
        &self.path
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: CompletionBackend> CompletionBackend for CachedBackend<B> {
    fn complete(
        &self,
        prompt: &PromptText,
        params: &DecodingParams,
    ) -> Result<CompletionRecord, BackendError> {
        let start = Instant::now();
        let key = cache_key(prompt.as_str(), params);
        if let Some(text) = self.index.read().expect("cache index poisoned").get(&key) {
            return Ok(CompletionRecord {
                prompt: prompt.clone(),
                params: params.clone(),
                completion: truncate_at_stop(text, &params.stop_sequences),
                source: CompletionSource::Cache,
                latency: start.elapsed(),
            });
        }

        let record = self.inner.complete(prompt, params)?;
        let _guard = self.append.lock().expect("cache append lock poisoned");
        // another worker may have stored it while we were waiting
        let mut index = self.index.write().expect("cache index poisoned");
        if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(key) {
            append_record(
                &self.path,
                &StoreRecord::new(prompt.as_str(), params, record.completion.clone()),
            )?;
            debug!("cached completion {}", slot.key());
            slot.insert(record.completion.clone());
        }
        Ok(record)
    }

    fn fingerprint(&self) -> BackendFingerprint {
        self.inner.fingerprint()
    }
}
