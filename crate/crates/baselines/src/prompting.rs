use thiserror::Error;
use tidyup_core::{Placement, Scenario, Split};
use tidyup_llmbackend::{BackendError, CompletionBackend, DecodingParams};
use tidyup_promptkit::{
    build_commonsense_prompt, build_examples_only_prompt, parse_placements, ParseError, Parsed,
    PromptError, PromptText, ReceptacleExamples,
};

#[derive(Debug, Error)]
pub enum LlmBaselineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn complete_placements(
    prompt: &PromptText,
    first: &tidyup_core::ObjectName,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> Result<Parsed<Vec<Placement>>, LlmBaselineError> {
    let rec = backend.complete(prompt, params)?;
    Ok(parse_placements(first, &rec.completion)?)
}

/// Seen placements in-context, then the `split` objects to place directly.
pub fn examples_only_predict(
    scenario: &Scenario,
    split: Split,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> Result<Parsed<Vec<Placement>>, LlmBaselineError> {
    let targets = scenario.objects(split);
    let seen = ReceptacleExamples::from_placements(
        scenario.placements(Split::Seen).to_vec(),
        scenario.receptacles.clone(),
    );
    let prompt = build_examples_only_prompt(&seen, &targets, &scenario.receptacles)?;
    complete_placements(&prompt, &targets[0], backend, params)
}

/// No preferences at all: objects and receptacles only.
pub fn commonsense_predict(
    scenario: &Scenario,
    split: Split,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> Result<Parsed<Vec<Placement>>, LlmBaselineError> {
    let targets = scenario.objects(split);
    let prompt = build_commonsense_prompt(&targets, &scenario.receptacles)?;
    complete_placements(&prompt, &targets[0], backend, params)
}
