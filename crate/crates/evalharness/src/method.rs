use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tidyup_baselines::{
    commonsense_predict, embedding_predict, examples_only_predict, taxonomy_predict,
    EmbeddingTable, NameMapping, TaxonomyGraph,
};
use tidyup_core::{Placement, PrimitiveChoice, Scenario, Split};
use tidyup_llmbackend::{
    build_backend, BackendConfig, BackendFingerprint, CompletionBackend, DecodingParams,
};
use tidyup_promptkit::{
    build_primitive_selection_prompt, build_primitive_summarization_prompt,
    build_receptacle_selection_prompt, build_receptacle_summarization_prompt,
    parse_placements, parse_primitive_choices, parse_summary, Parsed, PrimitiveExamples,
    PromptText, ReceptacleExamples, Summary,
};

use crate::{Anomaly, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Summarization,
    ExamplesOnly,
    Commonsense,
    Taxonomy,
    Embedding,
    HumanSummary,
}

impl MethodKind {
    pub const ALL: [MethodKind; 6] = [
        Self::Summarization,
        Self::ExamplesOnly,
        Self::Commonsense,
        Self::Taxonomy,
        Self::Embedding,
        Self::HumanSummary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Summarization => "summarization",
            Self::ExamplesOnly => "examples-only",
            Self::Commonsense => "commonsense",
            Self::Taxonomy => "taxonomy",
            Self::Embedding => "embedding",
            Self::HumanSummary => "human-summary",
        }
    }

    pub fn uses_llm(self) -> bool {
        !matches!(self, Self::Taxonomy | Self::Embedding)
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

/// Files a method may need.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodResources {
    pub taxonomy: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
    pub name_mapping: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub human_summaries: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub kind: MethodKind,
    pub backend: Option<BackendConfig>,
    #[serde(default)]
    pub resources: MethodResources,
}

impl MethodSpec {
    pub fn new(kind: MethodKind) -> Self {
        Self {
            kind,
            backend: None,
            resources: MethodResources::default(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(HarnessError::Config(format!("method {} requires {what}", self.kind)))
            }
        };
        if self.kind.uses_llm() {
            need(self.backend.is_some(), "a backend")?;
        }
        let r = &self.resources;
        match self.kind {
            MethodKind::Taxonomy => need(r.taxonomy.is_some(), "a taxonomy file"),
            MethodKind::Embedding => need(r.embeddings.is_some(), "an embedding table"),
            MethodKind::HumanSummary => need(r.human_summaries.is_some(), "a human summary file"),
            _ => Ok(()),
        }
    }
}

/// `scenario_id<TAB>summary text` per line.
pub fn load_human_summaries(path: &Path) -> Result<HashMap<String, String>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, summary) = line.split_once('\t').ok_or_else(|| {
            HarnessError::Config(format!("{}:{}: expected id<TAB>summary", path.display(), i + 1))
        })?;
        out.insert(id.trim().to_string(), summary.trim().to_string());
    }
    Ok(out)
}

/// Predictions for one split plus anything that went wrong producing them.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPrediction<T> {
    pub items: Vec<T>,
    pub anomalies: Vec<Anomaly>,
}

impl<T> Default for SplitPrediction<T> {
    fn default() -> Self {
        Self {
            items: Vec::new(),
            anomalies: Vec::new(),
        }
    }
}

impl<T> SplitPrediction<T> {
    fn failed(detail: impl Into<String>) -> Self {
        Self {
            items: Vec::new(),
            anomalies: vec![Anomaly::MethodError {
                detail: detail.into(),
            }],
        }
    }

    fn unparsed(detail: String) -> Self {
        Self {
            items: Vec::new(),
            anomalies: vec![Anomaly::UnparsedOutput { detail }],
        }
    }

    fn from_parsed(parsed: Parsed<Vec<T>>) -> Self {
        Self {
            items: parsed.value,
            anomalies: parsed
                .warnings
                .into_iter()
                .map(|detail| Anomaly::UnparsedOutput { detail })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutput<T> {
    pub summary: Option<String>,
    pub seen: SplitPrediction<T>,
    pub unseen: SplitPrediction<T>,
}

impl<T> MethodOutput<T> {
    fn failed(detail: String) -> Self {
        Self {
            summary: None,
            seen: SplitPrediction::failed(detail.clone()),
            unseen: SplitPrediction::failed(detail),
        }
    }
}

fn complete(
    backend: &dyn CompletionBackend,
    prompt: &PromptText,
    params: &DecodingParams,
) -> Result<String, String> {
    backend
        .complete(prompt, params)
        .map(|r| r.completion)
        .map_err(|e| e.to_string())
}

fn select_receptacles(
    scenario: &Scenario,
    split: Split,
    summary: &Summary,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> SplitPrediction<Placement> {
    let objects = scenario.objects(split);
    let completion = build_receptacle_selection_prompt(summary, &objects, &scenario.receptacles)
        .map_err(|e| e.to_string())
        .and_then(|p| complete(backend, &p, params));
    match completion {
        Ok(c) => match parse_placements(&objects[0], &c) {
            Ok(parsed) => SplitPrediction::from_parsed(parsed),
            Err(e) => SplitPrediction::unparsed(e.to_string()),
        },
        Err(e) => SplitPrediction::failed(e),
    }
}

fn summarize_receptacles(
    scenario: &Scenario,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> Result<Summary, String> {
    let seen = ReceptacleExamples::from_placements(scenario.seen.clone(), scenario.receptacles.clone());
    let prompt = build_receptacle_summarization_prompt(&seen).map_err(|e| e.to_string())?;
    let completion = complete(backend, &prompt, params)?;
    parse_summary(&completion).map_err(|e| format!("summary: {e}"))
}

/// Summarize the seen placements, then place the unseen objects and,
/// separately, the seen objects through that summary. Failures become
/// anomalies rather than errors.
pub fn run_summarization_method(
    scenario: &Scenario,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> MethodOutput<Placement> {
    match summarize_receptacles(scenario, backend, params) {
        Ok(summary) => with_summary(scenario, summary, backend, params),
        Err(e) => MethodOutput::failed(e),
    }
}

fn with_summary(
    scenario: &Scenario,
    summary: Summary,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> MethodOutput<Placement> {
    MethodOutput {
        seen: select_receptacles(scenario, Split::Seen, &summary, backend, params),
        unseen: select_receptacles(scenario, Split::Unseen, &summary, backend, params),
        summary: Some(summary.text().to_string()),
    }
}

/// The primitive counterpart of [`run_summarization_method`].
pub fn run_primitive_summarization_method(
    scenario: &Scenario,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> MethodOutput<PrimitiveChoice> {
    let (Some(seen), Some(_)) = (scenario.primitives(Split::Seen), scenario.primitives(Split::Unseen))
    else {
        return MethodOutput::failed("scenario has no primitive annotations".into());
    };
    let examples = PrimitiveExamples {
        objects: scenario.objects(Split::Seen),
        choices: seen.to_vec(),
    };
    let summary = build_primitive_summarization_prompt(&examples)
        .map_err(|e| e.to_string())
        .and_then(|p| complete(backend, &p, params))
        .and_then(|c| parse_summary(&c).map_err(|e| format!("summary: {e}")));
    let summary = match summary {
        Ok(s) => s,
        Err(e) => return MethodOutput::failed(e),
    };
    let select = |split| {
        let objects = scenario.objects(split);
        let completion = build_primitive_selection_prompt(&summary, &objects)
            .map_err(|e| e.to_string())
            .and_then(|p| complete(backend, &p, params));
        match completion {
            Ok(c) => match parse_primitive_choices(&c) {
                Ok(parsed) => SplitPrediction::from_parsed(parsed),
                Err(e) => SplitPrediction::unparsed(e.to_string()),
            },
            Err(e) => SplitPrediction::failed(e),
        }
    };
    MethodOutput {
        seen: select(Split::Seen),
        unseen: select(Split::Unseen),
        summary: Some(summary.text().to_string()),
    }
}

/// A method with its backend built and resources loaded, ready to run
/// against many scenarios concurrently.
pub struct PreparedMethod {
    pub kind: MethodKind,
    backend: Option<Arc<dyn CompletionBackend>>,
    params: DecodingParams,
    taxonomy: Option<(TaxonomyGraph, NameMapping)>,
    embeddings: Option<EmbeddingTable>,
    human: HashMap<String, String>,
}

impl PreparedMethod {
    pub fn prepare(spec: &MethodSpec) -> Result<Self, HarnessError> {
        spec.validate()?;
        let mut m = Self::bare(spec.kind);
        if let Some(cfg) = &spec.backend {
            if spec.kind.uses_llm() {
                m.backend = Some(Arc::from(build_backend(cfg)?));
                m.params = DecodingParams::for_model(cfg.model_id.clone());
            }
        }
        let r = &spec.resources;
        match spec.kind {
            MethodKind::Taxonomy => {
                let g = TaxonomyGraph::load(r.taxonomy.as_deref().expect("validated"), r.synonyms.as_deref())?;
                let mapping = match &r.name_mapping {
                    Some(p) => NameMapping::load(p, &g)?,
                    None => NameMapping::default(),
                };
                m.taxonomy = Some((g, mapping));
            }
            MethodKind::Embedding => {
                m.embeddings = Some(EmbeddingTable::load(r.embeddings.as_deref().expect("validated"))?);
            }
            MethodKind::HumanSummary => {
                m.human = load_human_summaries(r.human_summaries.as_deref().expect("validated"))?;
            }
            _ => {}
        }
        Ok(m)
    }

    fn bare(kind: MethodKind) -> Self {
        Self {
            kind,
            backend: None,
            params: DecodingParams::default(),
            taxonomy: None,
            embeddings: None,
            human: HashMap::new(),
        }
    }

    /// An LLM-based method over an existing backend handle.
    pub fn with_backend(
        kind: MethodKind,
        backend: Arc<dyn CompletionBackend>,
        params: DecodingParams,
    ) -> Self {
        Self {
            backend: Some(backend),
            params,
            ..Self::bare(kind)
        }
    }

    pub fn with_taxonomy(g: TaxonomyGraph, m: NameMapping) -> Self {
        Self {
            taxonomy: Some((g, m)),
            ..Self::bare(MethodKind::Taxonomy)
        }
    }

    pub fn with_embeddings(table: EmbeddingTable) -> Self {
        Self {
            embeddings: Some(table),
            ..Self::bare(MethodKind::Embedding)
        }
    }

    pub fn human_summaries(mut self, summaries: HashMap<String, String>) -> Self {
        self.human = summaries;
        self
    }

    pub fn fingerprint(&self) -> Option<BackendFingerprint> {
        self.backend.as_ref().map(|b| b.fingerprint())
    }

    fn backend(&self) -> Result<&dyn CompletionBackend, HarnessError> {
        self.backend
            .as_deref()
            .ok_or_else(|| HarnessError::Config(format!("method {} requires a backend", self.kind)))
    }

    pub(crate) fn check(&self) -> Result<(), HarnessError> {
        if self.kind.uses_llm() {
            self.backend()?;
        }
        let missing = match self.kind {
            MethodKind::Taxonomy => self.taxonomy.is_none(),
            MethodKind::Embedding => self.embeddings.is_none(),
            _ => false,
        };
        if missing {
            return Err(HarnessError::Config(format!("method {} is missing its resource", self.kind)));
        }
        Ok(())
    }

    pub(crate) fn check_primitives(&self) -> Result<(), HarnessError> {
        if self.kind != MethodKind::Summarization {
            return Err(HarnessError::Config(format!(
                "primitive benchmark supports only the summarization method, not {}",
                self.kind
            )));
        }
        self.check()
    }

    fn nearest_neighbor(
        &self,
        scenario: &Scenario,
        split: Split,
        predict: impl Fn(&tidyup_core::ObjectName) -> Result<tidyup_core::ReceptacleName, String>,
    ) -> SplitPrediction<Placement> {
        let mut out = SplitPrediction::default();
        for p in scenario.placements(split) {
            match predict(&p.object) {
                Ok(r) => out.items.push(Placement::new(p.object.clone(), r)),
                Err(detail) => out.anomalies.push(Anomaly::MethodError { detail }),
            }
        }
        out
    }

    /// Receptacle predictions for both splits. Never fails: problems are
    /// recorded as anomalies.
    pub fn predict(&self, scenario: &Scenario) -> MethodOutput<Placement> {
        let llm_split = |f: fn(&Scenario, Split, &dyn CompletionBackend, &DecodingParams) -> _, split| {
            let backend = match self.backend() {
                Ok(b) => b,
                Err(e) => return SplitPrediction::failed(e.to_string()),
            };
            match f(scenario, split, backend, &self.params) {
                Ok(parsed) => SplitPrediction::from_parsed(parsed),
                Err(tidyup_baselines::LlmBaselineError::Parse(e)) => {
                    SplitPrediction::unparsed(e.to_string())
                }
                Err(e) => SplitPrediction::failed(e.to_string()),
            }
        };
        match self.kind {
            MethodKind::Summarization => match self.backend() {
                Ok(b) => run_summarization_method(scenario, b, &self.params),
                Err(e) => MethodOutput::failed(e.to_string()),
            },
            MethodKind::HumanSummary => {
                let backend = match self.backend() {
                    Ok(b) => b,
                    Err(e) => return MethodOutput::failed(e.to_string()),
                };
                match self.human.get(&scenario.id).map(|t| Summary::new(t.as_str())) {
                    Some(Ok(summary)) => with_summary(scenario, summary, backend, &self.params),
                    Some(Err(e)) => MethodOutput::failed(format!("human summary: {e}")),
                    None => MethodOutput::failed(format!("no human summary for {}", scenario.id)),
                }
            }
            MethodKind::ExamplesOnly => MethodOutput {
                summary: None,
                seen: llm_split(examples_only_predict, Split::Seen),
                unseen: llm_split(examples_only_predict, Split::Unseen),
            },
            MethodKind::Commonsense => MethodOutput {
                summary: None,
                seen: llm_split(commonsense_predict, Split::Seen),
                unseen: llm_split(commonsense_predict, Split::Unseen),
            },
            MethodKind::Taxonomy => {
                let Some((g, m)) = &self.taxonomy else {
                    return MethodOutput::failed("taxonomy not loaded".into());
                };
                let f = |t: &_| taxonomy_predict(scenario, g, m, t).map_err(|e| e.to_string());
                MethodOutput {
                    summary: None,
                    seen: self.nearest_neighbor(scenario, Split::Seen, f),
                    unseen: self.nearest_neighbor(scenario, Split::Unseen, f),
                }
            }
            MethodKind::Embedding => {
                let Some(table) = &self.embeddings else {
                    return MethodOutput::failed("embedding table not loaded".into());
                };
                let f = |t: &_| embedding_predict(scenario, table, t).map_err(|e| e.to_string());
                MethodOutput {
                    summary: None,
                    seen: self.nearest_neighbor(scenario, Split::Seen, f),
                    unseen: self.nearest_neighbor(scenario, Split::Unseen, f),
                }
            }
        }
    }

    pub fn predict_primitives(&self, scenario: &Scenario) -> MethodOutput<PrimitiveChoice> {
        match self.backend() {
            Ok(b) => run_primitive_summarization_method(scenario, b, &self.params),
            Err(e) => MethodOutput::failed(e.to_string()),
        }
    }
}
