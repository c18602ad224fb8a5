//! Subcommand implementations. Exit codes: 0 success, 1 validation
//! findings, 2 usage or configuration error, 3 backend failure.

mod args;

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tidyup_core::{load_dataset, validate_dataset, DatasetError, ObjectName};
use tidyup_evalharness::{
    run_benchmark, run_primitive_benchmark, BenchmarkReport, HarnessError, MethodKind, MethodResources,
    MethodSpec,
};
use tidyup_llmbackend::{
    build_backend, load_store, BackendConfig, CompletionBackend, DecodingParams, ReplayBackend, CACHE_FILE,
};
use tidyup_promptkit::{
    build_category_extraction_prompt, build_primitive_summarization_prompt,
    build_receptacle_summarization_prompt, parse_object_list, parse_primitive_examples,
    parse_receptacle_examples, parse_summary, OBJECT_LIST_OPENING,
};
use tidyup_simworld::{
    derive_rules, resolve_rules, summarize, sweep, EpisodeLog, RuleTable, RulesFile, Scene, SimConfig, SimError,
    SweepSummary, Termination, WorldFile,
};

pub use args::*;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BACKEND: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(e: impl Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    pub fn backend(e: impl Display) -> Self {
        Self {
            code: EXIT_BACKEND,
            message: e.to_string(),
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Backend(_) | SimError::Parse(_) => Self::backend(e),
            _ => Self::usage(e),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        Self::usage(e)
    }
}

pub fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: &dyn Display| CliError::usage(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| fail(&e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
    tmp.write_all(bytes).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::usage(format!("cannot write output: {e}"))
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_to(cli, &mut lock)
}

pub fn run_to(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Validate(a) => cmd_validate(a, out),
        Command::Summarize(a) => cmd_summarize(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::EvalPrimitives(a) => cmd_eval_primitives(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::CacheInfo(a) => cmd_cache_info(a, out),
    }
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let report = match load_dataset(&a.dataset) {
        Ok(ds) => validate_dataset(&ds),
        // invariant violations are findings, not a failure to read the file
        Err(DatasetError::Validation(report)) => report,
        Err(e) => return Err(CliError::usage(e)),
    };
    write!(out, "{report}").map_err(out_err)?;
    Ok(if report.is_valid() { EXIT_OK } else { EXIT_FINDINGS })
}

fn backend_from(cfg: &BackendConfig) -> Result<Box<dyn CompletionBackend>, CliError> {
    build_backend(cfg).map_err(CliError::usage)
}

fn params_for(cfg: &BackendConfig) -> DecodingParams {
    DecodingParams::for_model(cfg.model_id.clone())
}

fn require_backend(args: &BackendArgs, why: &str) -> Result<BackendConfig, CliError> {
    args.resolve()?
        .ok_or_else(|| CliError::usage(format!("{why} needs a backend (--replay, --endpoint or --backend-config)")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryOutput {
    pub summary: String,
    pub categories: Option<Vec<ObjectName>>,
}

/// Summarize a seen block; receptacle summaries also get their category
/// list extracted.
pub fn summarize_examples(
    text: &str,
    mode: SummaryMode,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> Result<SummaryOutput, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::usage("the examples file is empty"));
    }
    let ask = |p| backend.complete(p, params).map(|r| r.completion).map_err(CliError::backend);
    match mode {
        SummaryMode::Receptacle => {
            let seen = parse_receptacle_examples(text).map_err(CliError::usage)?;
            let prompt = build_receptacle_summarization_prompt(&seen).map_err(CliError::usage)?;
            let summary = parse_summary(&ask(&prompt)?).map_err(CliError::backend)?;
            let prompt = build_category_extraction_prompt(&summary);
            let categories = parse_object_list(OBJECT_LIST_OPENING, &ask(&prompt)?).map_err(CliError::backend)?;
            Ok(SummaryOutput {
                summary: summary.text().to_string(),
                categories: Some(categories),
            })
        }
        SummaryMode::Primitive => {
            let seen = parse_primitive_examples(text).map_err(CliError::usage)?;
            let prompt = build_primitive_summarization_prompt(&seen).map_err(CliError::usage)?;
            let summary = parse_summary(&ask(&prompt)?).map_err(CliError::backend)?;
            Ok(SummaryOutput {
                summary: summary.text().to_string(),
                categories: None,
            })
        }
    }
}

fn cmd_summarize(a: &SummarizeArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let text = std::fs::read_to_string(&a.examples)
        .map_err(|e| CliError::usage(format!("{}: {e}", a.examples.display())))?;
    if text.trim().is_empty() {
        return Err(CliError::usage(format!("{} holds no examples", a.examples.display())));
    }
    let cfg = require_backend(&a.backend, "summarize")?;
    let backend = backend_from(&cfg)?;
    let s = summarize_examples(&text, a.mode, &backend, &params_for(&cfg))?;
    writeln!(out, "{}", s.summary).map_err(out_err)?;
    if let Some(c) = &s.categories {
        let names: Vec<&str> = c.iter().map(|c| c.as_str()).collect();
        writeln!(out, "categories: {}", names.join(", ")).map_err(out_err)?;
    }
    Ok(EXIT_OK)
}

fn write_report(report: &BenchmarkReport, dir: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    write!(out, "{}", report.table()).map_err(out_err)?;
    if let Some(dir) = dir {
        write_atomic(&dir.join("report.json"), report.to_json().as_bytes())?;
        write_atomic(&dir.join("report.csv"), report.to_csv().as_bytes())?;
        writeln!(out, "wrote {}", dir.display()).map_err(out_err)?;
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    if a.workers == 0 {
        return Err(CliError::usage("--workers must be at least 1"));
    }
    let ds = load_dataset(&a.dataset).map_err(CliError::usage)?;
    let backend = a.backend.resolve()?;
    if backend.is_some() && !a.method.uses_llm() {
        return Err(CliError::usage(format!("method {} does not use a backend", a.method)));
    }
    let r = &a.resources;
    let spec = MethodSpec {
        kind: a.method,
        backend,
        resources: MethodResources {
            taxonomy: r.taxonomy.clone(),
            synonyms: r.synonyms.clone(),
            name_mapping: r.name_mapping.clone(),
            embeddings: r.embeddings.clone(),
            human_summaries: r.human_summaries.clone(),
        },
    };
    let report = run_benchmark(&ds, &spec, a.workers)?;
    write_report(&report, a.report.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn cmd_eval_primitives(a: &EvalPrimitivesArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    if a.workers == 0 {
        return Err(CliError::usage("--workers must be at least 1"));
    }
    let ds = load_dataset(&a.dataset).map_err(CliError::usage)?;
    let spec = MethodSpec {
        backend: Some(require_backend(&a.backend, "eval-primitives")?),
        ..MethodSpec::new(MethodKind::Summarization)
    };
    let report = run_primitive_benchmark(&ds, &spec, a.workers)?;
    write_report(&report, a.report.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn pct(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{:.1}%", v * 100.0))
}

fn print_episode(log: &EpisodeLog, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "scene {}, seed {}", log.world, log.seed)?;
    writeln!(
        out,
        "overall {:.2} ({}/{} correct, {} deposited)",
        log.overall, log.correct, log.total, log.deposited
    )?;
    let r = &log.rates;
    writeln!(
        out,
        "localization {}  classification {}  selection {}  execution {}",
        pct(r.localization),
        pct(r.classification),
        pct(r.selection),
        pct(r.execution)
    )?;
    let ended = match log.termination {
        Termination::NoDetectedObjects => "no detected objects left",
        Termination::MaxSteps => "step limit",
    };
    writeln!(out, "steps {}, ended: {ended}", log.steps)?;
    writeln!(out, "anomalies: {}", log.anomalies.len())?;
    for a in &log.anomalies {
        writeln!(out, "  {a}")?;
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let world = WorldFile::load(&a.scenario).map_err(CliError::usage)?;
    let mut cfg = SimConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.rng_seed = seed;
    }
    let receptacles = world.receptacle_names();
    let table = if a.derive_rules {
        let bcfg = require_backend(&a.backend, "--derive-rules")?;
        let backend = backend_from(&bcfg)?;
        let params = params_for(&bcfg);
        let rules = derive_rules(&world.examples, &receptacles, &backend, &params)?;
        writeln!(out, "receptacle rule: {}", rules.receptacle_summary).map_err(out_err)?;
        writeln!(out, "primitive rule: {}", rules.primitive_summary).map_err(out_err)?;
        let names: Vec<&str> = rules.categories.iter().map(|c| c.as_str()).collect();
        writeln!(out, "categories: {}", names.join(", ")).map_err(out_err)?;
        resolve_rules(&rules, &receptacles, &backend, &params)?
    } else {
        let path = a.rules.as_ref().expect("clap requires a rule source");
        match RulesFile::load(path)? {
            RulesFile::Summaries(rules) => {
                let bcfg = require_backend(&a.backend, "a summaries rules file")?;
                resolve_rules(&rules, &receptacles, &backend_from(&bcfg)?, &params_for(&bcfg))?
            }
            RulesFile::Table { categories, table } => {
                if a.backend.is_set() {
                    return Err(CliError::usage("a rule table needs no backend"));
                }
                RuleTable::new(categories, table)?
            }
        }
    };
    for e in table.entries() {
        writeln!(out, "rule: {} -> {} ({})", e.category, e.receptacle, e.primitive).map_err(out_err)?;
    }
    let scene = Scene::new(world, cfg.inflation)?;
    let mut trace = Vec::new();
    let log = scene.run(&table, &cfg, a.trace.as_ref().map(|_| &mut trace as &mut dyn Write))?;
    if let Some(path) = &a.trace {
        write_atomic(path, &trace)?;
    }
    if let Some(path) = &a.log {
        let json = serde_json::to_string_pretty(&log).expect("episode log serializes") + "\n";
        write_atomic(path, json.as_bytes())?;
    }
    print_episode(&log, out).map_err(out_err)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SweepReport<'a> {
    config: &'a SimConfig,
    seeds_per_scene: u64,
    summary: &'a SweepSummary,
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let mut cfg = SimConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.rng_seed = seed;
    }
    if a.seeds == 0 {
        return Err(CliError::usage("--seeds must be at least 1"));
    }
    let mut scenes = Vec::new();
    for path in &a.scenario {
        let world = WorldFile::load(path).map_err(CliError::usage)?;
        let table = RuleTable::from_ground_truth(&world)?;
        scenes.push((Scene::new(world, cfg.inflation)?, table));
    }
    let logs = sweep(&scenes, &cfg, a.seeds, a.workers)?;
    let s = summarize(&logs).expect("at least one episode");
    let w = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(out, "episodes {} over {} scenes", s.episodes, scenes.len())?;
        let o = &s.overall;
        writeln!(
            out,
            "mean overall {:.3} (95% CI {:.3} to {:.3}, std {:.3})",
            o.mean, o.ci95.0, o.ci95.1, o.std
        )?;
        writeln!(
            out,
            "localization {}  classification {}  execution {}",
            pct(s.localization),
            pct(s.classification),
            pct(s.execution)
        )?;
        for (name, e) in &s.per_world {
            writeln!(out, "  {name:<16} {:.3}", e.mean)?;
        }
        writeln!(out, "anomalies: {}", s.anomalies)
    };
    w(out).map_err(out_err)?;
    if let Some(path) = &a.report {
        let report = SweepReport {
            config: &cfg,
            seeds_per_scene: a.seeds,
            summary: &s,
        };
        let json = serde_json::to_string_pretty(&report).expect("sweep report serializes") + "\n";
        write_atomic(path, json.as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn cmd_cache_info(a: &CacheInfoArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let path = if a.store.is_dir() {
        a.store.join(CACHE_FILE)
    } else {
        a.store.clone()
    };
    let records = load_store(&path).map_err(CliError::usage)?;
    let hash = ReplayBackend::open(&path, "")
        .map_err(CliError::usage)?
        .fingerprint_hash();
    let mut models: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records.values() {
        *models.entry(r.model.as_str()).or_default() += 1;
    }
    let w = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(out, "store {}", path.display())?;
        writeln!(out, "records {}", records.len())?;
        for (m, n) in &models {
            writeln!(out, "  {m}: {n}")?;
        }
        writeln!(out, "sha256 {hash}")
    };
    w(out).map_err(out_err)?;
    Ok(EXIT_OK)
}

trait ReplayHash {
    fn fingerprint_hash(&self) -> String;
}

impl ReplayHash for ReplayBackend {
    fn fingerprint_hash(&self) -> String {
        self.fingerprint().replay_hash.unwrap_or_default()
    }
}
