use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use tidyup_evalharness::MethodKind;
use tidyup_llmbackend::{BackendConfig, BackendMode, DEFAULT_MODEL};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "tidyup",
    version,
    about = "Personalized tidy-up: benchmark validation, LLM summarization, evaluation and simulation"
)]
pub struct Cli {
    /// More log output (repeat for more)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a benchmark dataset against its invariants
    Validate(ValidateArgs),
    /// Summarize seen examples into a rule (and categories, for receptacles)
    Summarize(SummarizeArgs),
    /// Score a placement method on a benchmark dataset
    Eval(EvalArgs),
    /// Score primitive selection on a benchmark dataset
    EvalPrimitives(EvalPrimitivesArgs),
    /// Run one simulated tidy-up episode
    Simulate(SimulateArgs),
    /// Run seeded episodes over scenes with ground-truth rules
    Sweep(SweepArgs),
    /// Describe a replay store or cache
    CacheInfo(CacheInfoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Replay,
    Http,
}

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    /// Completion backend; inferred from --replay or --endpoint when omitted
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Replay store (JSON lines) answering prompts offline
    #[arg(long, value_name = "PATH", conflicts_with = "endpoint")]
    pub replay: Option<PathBuf>,
    /// Completion endpoint URL; the key is read from LLM_API_KEY
    #[arg(long, value_name = "URL")]
    pub endpoint: Option<String>,
    /// Write-through cache directory for the http backend
    #[arg(long, value_name = "DIR", requires = "endpoint")]
    pub cache: Option<PathBuf>,
    /// Model identifier sent to the backend and used in cache keys
    #[arg(long, value_name = "ID")]
    pub model: Option<String>,
    /// Backend configuration file (JSON) instead of the flags above
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with_all = ["backend", "replay", "endpoint", "cache", "model"]
    )]
    pub backend_config: Option<PathBuf>,
}

impl BackendArgs {
    pub fn is_set(&self) -> bool {
        self.backend.is_some() || self.replay.is_some() || self.endpoint.is_some() || self.backend_config.is_some()
    }

    /// The backend described by the flags, if any.
    pub fn resolve(&self) -> Result<Option<BackendConfig>, CliError> {
        if let Some(path) = &self.backend_config {
            return BackendConfig::load(path).map(Some).map_err(CliError::usage);
        }
        let kind = match (self.backend, &self.replay, &self.endpoint) {
            (None, None, None) => return Ok(None),
            (Some(k), _, _) => k,
            (None, Some(_), _) => BackendKind::Replay,
            (None, None, Some(_)) => BackendKind::Http,
        };
        let mut cfg = match kind {
            BackendKind::Replay => {
                let path = self
                    .replay
                    .clone()
                    .ok_or_else(|| CliError::usage("--backend replay needs --replay PATH"))?;
                if self.endpoint.is_some() || self.cache.is_some() {
                    return Err(CliError::usage("--endpoint and --cache apply only to --backend http"));
                }
                BackendConfig::replay(path)
            }
            BackendKind::Http => {
                let url = self
                    .endpoint
                    .clone()
                    .ok_or_else(|| CliError::usage("--backend http needs --endpoint URL"))?;
                if self.replay.is_some() {
                    return Err(CliError::usage("--replay applies only to --backend replay"));
                }
                BackendConfig {
                    cache_dir: self.cache.clone(),
                    ..BackendConfig::http(url)
                }
            }
        };
        cfg.model_id = self.model.clone().unwrap_or_else(|| DEFAULT_MODEL.to_string());
        debug_assert!(matches!(cfg.mode, BackendMode::Http | BackendMode::Replay));
        Ok(Some(cfg))
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Benchmark dataset (JSON)
    #[arg(long, value_name = "PATH")]
    pub dataset: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SummaryMode {
    Receptacle,
    Primitive,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Seen example block in the prompt format
    #[arg(long, value_name = "PATH")]
    pub examples: PathBuf,
    /// Which preference to summarize
    #[arg(long, value_enum, default_value = "receptacle")]
    pub mode: SummaryMode,
    #[command(flatten)]
    pub backend: BackendArgs,
}

fn parse_method(s: &str) -> Result<MethodKind, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    /// Concept graph edges (TSV, child<TAB>parent) for the taxonomy method
    #[arg(long, value_name = "PATH")]
    pub taxonomy: Option<PathBuf>,
    /// Surface-form synonyms (TSV) for the taxonomy method
    #[arg(long, value_name = "PATH", requires = "taxonomy")]
    pub synonyms: Option<PathBuf>,
    /// Object name to concept mapping (TSV) for the taxonomy method
    #[arg(long, value_name = "PATH", requires = "taxonomy")]
    pub name_mapping: Option<PathBuf>,
    /// Embedding table (TSV) for the embedding method
    #[arg(long, value_name = "PATH")]
    pub embeddings: Option<PathBuf>,
    /// Hand-written summaries (TSV, scenario<TAB>summary) for human-summary
    #[arg(long, value_name = "PATH")]
    pub human_summaries: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Benchmark dataset (JSON)
    #[arg(long, value_name = "PATH")]
    pub dataset: PathBuf,
    /// summarization, examples-only, commonsense, taxonomy, embedding or human-summary
    #[arg(long, value_name = "METHOD", value_parser = parse_method)]
    pub method: MethodKind,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub resources: ResourceArgs,
    /// Scenarios scored in parallel
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub workers: usize,
    /// Directory for report.json and report.csv
    #[arg(long, value_name = "DIR")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalPrimitivesArgs {
    /// Benchmark dataset with primitive annotations (JSON)
    #[arg(long, value_name = "PATH")]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Scenarios scored in parallel
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub workers: usize,
    /// Directory for report.json and report.csv
    #[arg(long, value_name = "DIR")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("rule_source").required(true).args(["rules", "derive_rules"])))]
pub struct SimulateArgs {
    /// Simulator scene (JSON)
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,
    /// Rules file: summaries plus categories, or a finished table
    #[arg(long, value_name = "PATH")]
    pub rules: Option<PathBuf>,
    /// Derive summaries and categories from the scene's seen examples
    #[arg(long)]
    pub derive_rules: bool,
    /// Simulator configuration (JSON)
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Random seed, overriding the configuration's rng_seed
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Per-action trace output (JSON lines)
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Episode log output (JSON)
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Simulator scenes (JSON); rules come from each scene's ground truth
    #[arg(long, value_name = "PATH", num_args = 1.., required = true)]
    pub scenario: Vec<PathBuf>,
    /// Simulator configuration (JSON)
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Episodes per scene
    #[arg(long, value_name = "N", default_value_t = 300)]
    pub seeds: u64,
    /// Base seed, overriding the configuration's rng_seed
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Episodes run in parallel
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub workers: usize,
    /// Summary output (JSON)
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CacheInfoArgs {
    /// Replay store file, or a cache directory
    #[arg(long, value_name = "PATH")]
    pub store: PathBuf,
}
