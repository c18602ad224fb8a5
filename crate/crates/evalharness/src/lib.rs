//! Runs a placement method over a benchmark dataset and scores it.
//!
//! Accuracy for one split of one scenario is the number of objects placed in
//! their ground-truth receptacle over the number of objects in the split.
//! Overall and per-criterion figures are unweighted means over scenarios.
//! Seen objects are scored by asking the method about them again: LLM
//! methods re-query them through the generated summary (or the examples),
//! nearest-neighbor methods apply their own rule, which finds the object
//! itself at distance zero.

mod method;
mod report;
mod run;
mod score;
mod script;

use thiserror::Error;

pub use method::{
    load_human_summaries, run_primitive_summarization_method, run_summarization_method,
    MethodKind, MethodOutput, MethodResources, MethodSpec, PreparedMethod, SplitPrediction,
};
pub use report::{BenchmarkReport, CriterionSummary, Task, SEEN_PROTOCOL};
pub use run::{run_benchmark, run_prepared, run_primitive_benchmark, run_prepared_primitives};
pub use script::{scripted_records, store_text, CompletionScript};
pub use score::{score_primitives, score_scenario, score_split, Anomaly, ScenarioResult, SplitResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Backend(#[from] tidyup_llmbackend::BackendError),
    #[error(transparent)]
    Taxonomy(#[from] tidyup_baselines::TaxonomyError),
    #[error(transparent)]
    Embedding(#[from] tidyup_baselines::EmbeddingError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario {0:?} has no primitive annotations")]
    MissingAnnotations(String),
}
