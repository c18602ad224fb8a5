use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use tidyup_core::{SortingCriterion, Split};
use tidyup_llmbackend::BackendFingerprint;

use crate::{MethodKind, ScenarioResult};

pub const SEEN_PROTOCOL: &str = "seen objects are re-queried through the method: LLM methods place them \
via the generated summary or the prompt under test, nearest-neighbor methods apply their own rule";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Receptacle,
    Primitive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub scenarios: usize,
    /// `None` when no scenario carries the tag.
    pub macro_acc_seen: Option<f64>,
    pub macro_acc_unseen: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub task: Task,
    pub method: MethodKind,
    pub backend: Option<BackendFingerprint>,
    pub seen_protocol: String,
    pub scenarios: usize,
    pub macro_acc_seen: f64,
    pub macro_acc_unseen: f64,
    pub per_criterion: BTreeMap<SortingCriterion, CriterionSummary>,
    pub anomalies: usize,
    pub results: Vec<ScenarioResult>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl BenchmarkReport {
    /// Aggregate per-scenario results; they are ordered by scenario id first.
    pub fn from_results(
        task: Task,
        method: MethodKind,
        backend: Option<BackendFingerprint>,
        mut results: Vec<ScenarioResult>,
    ) -> Self {
        results.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
        let acc = |rs: &[&ScenarioResult], split| mean(rs.iter().map(|r| r.split(split).accuracy));
        let all: Vec<&ScenarioResult> = results.iter().collect();
        let per_criterion = SortingCriterion::ALL
            .into_iter()
            .map(|c| {
                let tagged: Vec<&ScenarioResult> =
                    results.iter().filter(|r| r.criteria.contains(&c)).collect();
                let summary = CriterionSummary {
                    scenarios: tagged.len(),
                    macro_acc_seen: acc(&tagged, Split::Seen),
                    macro_acc_unseen: acc(&tagged, Split::Unseen),
                };
                (c, summary)
            })
            .collect();
        Self {
            task,
            method,
            backend,
            seen_protocol: SEEN_PROTOCOL.to_string(),
            scenarios: results.len(),
            macro_acc_seen: acc(&all, Split::Seen).unwrap_or(0.0),
            macro_acc_unseen: acc(&all, Split::Unseen).unwrap_or(0.0),
            per_criterion,
            anomalies: results.iter().map(ScenarioResult::anomaly_count).sum(),
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per scenario per split.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "scenario_id", "split", "total", "correct", "incorrect", "unpredicted", "accuracy",
            "anomalies",
        ])
        .expect("in-memory write");
        for r in &self.results {
            for s in [&r.seen, &r.unseen] {
                w.write_record([
                    r.scenario_id.clone(),
                    s.split.as_str().to_string(),
                    s.total.to_string(),
                    s.correct.to_string(),
                    s.incorrect.to_string(),
                    s.unpredicted.to_string(),
                    s.accuracy.to_string(),
                    s.anomalies.len().to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Human-readable accuracy table.
    pub fn table(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.1}%", v * 100.0));
        let mut out = String::new();
        let backend = self
            .backend
            .as_ref()
            .map(|b| format!(" ({} {})", b.kind, b.model_id))
            .unwrap_or_default();
        let _ = writeln!(out, "method: {}{backend}", self.method);
        let _ = writeln!(out, "scenarios: {}", self.scenarios);
        let _ = writeln!(
            out,
            "macro accuracy: seen {} unseen {}",
            pct(Some(self.macro_acc_seen)),
            pct(Some(self.macro_acc_unseen))
        );
        let _ = writeln!(out, "{:<20} {:>3} {:>7} {:>7}", "criterion", "n", "seen", "unseen");
        for (c, s) in &self.per_criterion {
            let _ = writeln!(
                out,
                "{:<20} {:>3} {:>7} {:>7}",
                c.as_str(),
                s.scenarios,
                pct(s.macro_acc_seen),
                pct(s.macro_acc_unseen)
            );
        }
        let _ = writeln!(out, "anomalies: {}", self.anomalies);
        out
    }
}
