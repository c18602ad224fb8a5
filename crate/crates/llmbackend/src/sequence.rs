use std::sync::Mutex;
use std::time::Duration;

use tidyup_promptkit::PromptText;

use crate::{
    BackendError, BackendFingerprint, CompletionBackend, CompletionRecord, CompletionSource,
    DecodingParams, StoreRecord,
};

/// Answers calls with the given completions in order and keeps a store
/// record for each, so a known pipeline can be turned into a replay store.
#[derive(Debug, Default)]
pub struct SequenceBackend {
    answers: Mutex<Vec<String>>,
    records: Mutex<Vec<StoreRecord>>,
}

impl SequenceBackend {
    pub fn new(answers: impl IntoIterator<Item = String>) -> Self {
        let mut answers: Vec<String> = answers.into_iter().collect();
        answers.reverse();
        Self {
            answers: Mutex::new(answers),
            records: Mutex::new(Vec::new()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.answers.lock().expect("poisoned").len()
    }

    pub fn into_records(self) -> Vec<StoreRecord> {
        self.records.into_inner().expect("poisoned")
    }
}

impl CompletionBackend for SequenceBackend {
    fn complete(&self, prompt: &PromptText, params: &DecodingParams) -> Result<CompletionRecord, BackendError> {
        let completion = self
            .answers
            .lock()
            .expect("poisoned")
            .pop()
            .ok_or_else(|| BackendError::Config("sequence backend ran out of completions".into()))?;
        self.records
            .lock()
            .expect("poisoned")
            .push(StoreRecord::new(prompt.as_str(), params, completion.clone()));
        Ok(CompletionRecord {
            prompt: prompt.clone(),
            params: params.clone(),
            completion,
            source: CompletionSource::Replay,
            latency: Duration::ZERO,
        })
    }

    fn fingerprint(&self) -> BackendFingerprint {
        BackendFingerprint {
            kind: "sequence".into(),
            model_id: String::new(),
            replay_hash: None,
        }
    }
}

/// One JSON line per record, as read by the replay backend.
pub fn store_lines(records: &[StoreRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use tidyup_promptkit::PromptKind;

    use super::*;
    use crate::ReplayBackend;

    #[test]
    fn answers_in_order_and_replays() {
        let seq = SequenceBackend::new(["one".to_string(), "two".to_string()]);
        let params = DecodingParams::default();
        let p = |t: &str| PromptText::new(PromptKind::Commonsense, t);
        assert_eq!(seq.complete(&p("a"), &params).unwrap().completion, "one");
        assert_eq!(seq.remaining(), 1);
        assert_eq!(seq.complete(&p("b"), &params).unwrap().completion, "two");
        assert!(matches!(seq.complete(&p("c"), &params), Err(BackendError::Config(_))));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.jsonl");
        std::fs::write(&path, store_lines(&seq.into_records())).unwrap();
        let replay = ReplayBackend::open(&path, "").unwrap();
        assert_eq!(replay.complete(&p("b"), &params).unwrap().completion, "two");
        assert_eq!(replay.complete(&p("a"), &params).unwrap().completion, "one");
    }
}
