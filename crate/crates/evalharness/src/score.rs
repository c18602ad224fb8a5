use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use tidyup_core::{
    names::normalize, ObjectName, Placement, PrimitiveChoice, Scenario, SortingCriterion, Split,
};

/// Something that went wrong while producing or scoring predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anomaly {
    /// The completion did not parse, or parsing stopped early.
    UnparsedOutput { detail: String },
    /// A prediction for an object that is not in the split.
    ExtraneousObject { object: String },
    /// A receptacle that is not in the scenario's list.
    UnknownReceptacle { object: String, receptacle: String },
    /// A second prediction for one object; the first one is scored.
    DuplicatePrediction { object: String },
    /// The method failed for this split or object.
    MethodError { detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub split: Split,
    pub total: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub unpredicted: usize,
    pub accuracy: f64,
    /// Raw predictions as `(object, label)` in output order.
    pub predictions: Vec<(String, String)>,
    pub anomalies: Vec<Anomaly>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario_id: String,
    pub criteria: BTreeSet<SortingCriterion>,
    pub summary: Option<String>,
    pub seen: SplitResult,
    pub unseen: SplitResult,
}

impl ScenarioResult {
    pub fn split(&self, split: Split) -> &SplitResult {
        match split {
            Split::Seen => &self.seen,
            Split::Unseen => &self.unseen,
        }
    }

    pub fn anomaly_count(&self) -> usize {
        self.seen.anomalies.len() + self.unseen.anomalies.len()
    }
}

/// Shared scoring over `(object, label)` pairs. `valid` lists the
/// normalized labels the scenario offers; `None` accepts any label.
fn score_pairs(
    split: Split,
    truth: &[(ObjectName, String)],
    predictions: Vec<(ObjectName, String)>,
    valid: Option<&HashSet<String>>,
    mut anomalies: Vec<Anomaly>,
) -> SplitResult {
    let gt: HashMap<String, String> = truth
        .iter()
        .map(|(o, l)| (o.normalized(), normalize(l)))
        .collect();
    let mut seen = HashSet::new();
    let (mut correct, mut incorrect) = (0, 0);
    for (object, label) in &predictions {
        let key = object.normalized();
        let Some(want) = gt.get(&key) else {
            anomalies.push(Anomaly::ExtraneousObject {
                object: object.to_string(),
            });
            continue;
        };
        if !seen.insert(key) {
            anomalies.push(Anomaly::DuplicatePrediction {
                object: object.to_string(),
            });
            continue;
        }
        let label_n = normalize(label);
        if valid.is_some_and(|v| !v.contains(&label_n)) {
            anomalies.push(Anomaly::UnknownReceptacle {
                object: object.to_string(),
                receptacle: label.clone(),
            });
        }
        if &label_n == want {
            correct += 1;
        } else {
            incorrect += 1;
        }
    }
    let total = truth.len();
    SplitResult {
        split,
        total,
        correct,
        incorrect,
        unpredicted: total - correct - incorrect,
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        predictions: predictions
            .into_iter()
            .map(|(o, l)| (o.to_string(), l))
            .collect(),
        anomalies,
    }
}

/// Score receptacle predictions for one split. Matching is exact after
/// trimming and case-folding.
pub fn score_split(
    scenario: &Scenario,
    split: Split,
    predictions: &[Placement],
    anomalies: Vec<Anomaly>,
) -> SplitResult {
    let truth: Vec<_> = scenario
        .placements(split)
        .iter()
        .map(|p| (p.object.clone(), p.receptacle.to_string()))
        .collect();
    let valid: HashSet<String> = scenario.receptacles.iter().map(|r| r.normalized()).collect();
    let preds = predictions
        .iter()
        .map(|p| (p.object.clone(), p.receptacle.to_string()))
        .collect();
    score_pairs(split, &truth, preds, Some(&valid), anomalies)
}

pub fn score_scenario(
    scenario: &Scenario,
    output: crate::MethodOutput<Placement>,
) -> ScenarioResult {
    ScenarioResult {
        scenario_id: scenario.id.clone(),
        criteria: scenario.criteria.clone(),
        summary: output.summary,
        seen: score_split(scenario, Split::Seen, &output.seen.items, output.seen.anomalies),
        unseen: score_split(scenario, Split::Unseen, &output.unseen.items, output.unseen.anomalies),
    }
}

fn score_primitive_split(
    scenario: &Scenario,
    split: Split,
    prediction: crate::SplitPrediction<PrimitiveChoice>,
) -> SplitResult {
    let truth: Vec<_> = scenario
        .primitives(split)
        .unwrap_or_default()
        .iter()
        .map(|c| (c.object.clone(), c.primitive.to_string()))
        .collect();
    let preds = prediction
        .items
        .iter()
        .map(|c| (c.object.clone(), c.primitive.to_string()))
        .collect();
    score_pairs(split, &truth, preds, None, prediction.anomalies)
}

/// Score primitive choices; the scenario must carry annotations.
pub fn score_primitives(
    scenario: &Scenario,
    output: crate::MethodOutput<PrimitiveChoice>,
) -> ScenarioResult {
    ScenarioResult {
        scenario_id: scenario.id.clone(),
        criteria: scenario.criteria.clone(),
        summary: output.summary,
        seen: score_primitive_split(scenario, Split::Seen, output.seen),
        unseen: score_primitive_split(scenario, Split::Unseen, output.unseen),
    }
}
