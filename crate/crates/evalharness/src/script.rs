//! Replay stores from hand-written completion scripts.
//!
//! A script maps scenario id to pipeline step to completion text. Steps:
//! `summary`, `seen`, `unseen` (selection through the summary),
//! `human/seen`, `human/unseen`, `examples-only/<split>`,
//! `commonsense/<split>`, `primitive-summary`, `primitive/<split>`.
//! Each step's prompt is built exactly as the harness builds it, so the
//! resulting store answers a benchmark run offline.

use std::collections::{BTreeMap, HashMap};

use tidyup_core::{Dataset, Scenario, Split};
use tidyup_llmbackend::{DecodingParams, StoreRecord};
use tidyup_promptkit::{
    build_commonsense_prompt, build_examples_only_prompt, build_primitive_selection_prompt,
    build_primitive_summarization_prompt, build_receptacle_selection_prompt,
    build_receptacle_summarization_prompt, parse_summary, PrimitiveExamples, PromptText,
    ReceptacleExamples, Summary,
};

use crate::HarnessError;

pub type CompletionScript = BTreeMap<String, BTreeMap<String, String>>;

fn split_of(name: &str) -> Option<Split> {
    match name {
        "seen" => Some(Split::Seen),
        "unseen" => Some(Split::Unseen),
        _ => None,
    }
}

fn step_prompt(
    s: &Scenario,
    step: &str,
    script: &BTreeMap<String, String>,
    human: Option<&str>,
) -> Result<PromptText, String> {
    let seen = || ReceptacleExamples::from_placements(s.seen.clone(), s.receptacles.clone());
    let summary_from = |key: &str| -> Result<Summary, String> {
        let text = script.get(key).ok_or(format!("step {step} needs a {key} step"))?;
        parse_summary(text).map_err(|e| format!("{key}: {e}"))
    };
    let (head, tail) = step.split_once('/').unwrap_or(("", step));
    let split = split_of(tail);
    let e = |e: tidyup_promptkit::PromptError| e.to_string();
    match (head, tail, split) {
        ("", "summary", _) => build_receptacle_summarization_prompt(&seen()).map_err(e),
        ("", _, Some(split)) => {
            build_receptacle_selection_prompt(&summary_from("summary")?, &s.objects(split), &s.receptacles)
                .map_err(e)
        }
        ("human", _, Some(split)) => {
            let text = human.ok_or("no human summary for this scenario")?;
            let summary = Summary::new(text).map_err(e)?;
            build_receptacle_selection_prompt(&summary, &s.objects(split), &s.receptacles).map_err(e)
        }
        ("examples-only", _, Some(split)) => {
            build_examples_only_prompt(&seen(), &s.objects(split), &s.receptacles).map_err(e)
        }
        ("commonsense", _, Some(split)) => {
            build_commonsense_prompt(&s.objects(split), &s.receptacles).map_err(e)
        }
        ("", "primitive-summary", _) => {
            let choices = s.primitives(Split::Seen).ok_or("scenario has no primitive annotations")?;
            build_primitive_summarization_prompt(&PrimitiveExamples {
                objects: s.objects(Split::Seen),
                choices: choices.to_vec(),
            })
            .map_err(e)
        }
        ("primitive", _, Some(split)) => {
            build_primitive_selection_prompt(&summary_from("primitive-summary")?, &s.objects(split))
                .map_err(e)
        }
        _ => Err(format!("unknown step {step:?}")),
    }
}

/// Store records for every scripted completion, in script order.
pub fn scripted_records(
    ds: &Dataset,
    script: &CompletionScript,
    human: &HashMap<String, String>,
    params: &DecodingParams,
) -> Result<Vec<StoreRecord>, HarnessError> {
    let mut out = Vec::new();
    for (id, steps) in script {
        let s = ds
            .get(id)
            .ok_or_else(|| HarnessError::Config(format!("script names unknown scenario {id:?}")))?;
        for (step, completion) in steps {
            let prompt = step_prompt(s, step, steps, human.get(id).map(String::as_str))
                .map_err(|e| HarnessError::Config(format!("{id}/{step}: {e}")))?;
            out.push(StoreRecord::new(prompt.as_str(), params, completion.clone()));
        }
    }
    Ok(out)
}

/// Render records as store file text, one JSON object per line.
pub fn store_text(records: &[StoreRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}
