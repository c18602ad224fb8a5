//! Prompt builders. Each prompt is the fixed in-context examples for its
//! kind, one blank line, then the test block rendered from the inputs.

use tidyup_core::{ObjectName, Placement, PrimitiveChoice, ReceptacleName};

use crate::dsl::{DslStatement, SUMMARY_MARKER};
use crate::prompt::{PromptKind, PromptText, Summary};
use crate::PromptError;

pub const RECEPTACLE_SUMMARIZATION_EXAMPLES: &str =
    include_str!("../templates/receptacle_summarization.txt");
pub const RECEPTACLE_SELECTION_EXAMPLES: &str =
    include_str!("../templates/receptacle_selection.txt");
pub const PRIMITIVE_SUMMARIZATION_EXAMPLES: &str =
    include_str!("../templates/primitive_summarization.txt");
pub const PRIMITIVE_SELECTION_EXAMPLES: &str =
    include_str!("../templates/primitive_selection.txt");
pub const CATEGORY_EXTRACTION_EXAMPLES: &str =
    include_str!("../templates/category_extraction.txt");

pub const COMMONSENSE_HEADER: &str = "# Put objects into their appropriate receptacles.";

/// The fragment a category-extraction prompt ends with.
pub const OBJECT_LIST_OPENING: &str = "objects = [\"";

/// Seen examples for receptacle selection: the scene's objects and
/// receptacles and the user's placements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceptacleExamples {
    pub objects: Vec<ObjectName>,
    pub receptacles: Vec<ReceptacleName>,
    pub placements: Vec<Placement>,
}

impl ReceptacleExamples {
    /// Build from placements alone, listing objects and receptacles in first
    /// appearance order.
    pub fn from_placements(placements: Vec<Placement>, receptacles: Vec<ReceptacleName>) -> Self {
        let objects = placements.iter().map(|p| p.object.clone()).collect();
        Self {
            objects,
            receptacles,
            placements,
        }
    }

    pub fn render(&self) -> String {
        let mut out = Lines::default();
        out.stmt(DslStatement::ObjectsList(self.objects.clone()));
        out.stmt(DslStatement::ReceptaclesList(self.receptacles.clone()));
        for p in &self.placements {
            out.stmt(DslStatement::placement(p));
        }
        out.finish()
    }
}

/// Seen examples for primitive selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveExamples {
    pub objects: Vec<ObjectName>,
    pub choices: Vec<PrimitiveChoice>,
}

impl PrimitiveExamples {
    pub fn render(&self) -> String {
        let mut out = Lines::default();
        out.stmt(DslStatement::ObjectsList(self.objects.clone()));
        for c in &self.choices {
            out.stmt(DslStatement::primitive(c));
        }
        out.finish()
    }
}

#[derive(Default)]
struct Lines(Vec<String>);

impl Lines {
    fn stmt(&mut self, s: DslStatement) {
        self.0.push(s.to_string());
    }

    fn raw(&mut self, s: impl Into<String>) {
        self.0.push(s.into());
    }

    fn finish(self) -> String {
        self.0.join("\n")
    }
}

fn with_examples(examples: &str, block: &str) -> String {
    format!("{}\n\n{}", examples.trim_end_matches('\n'), block)
}

fn partial_call(first: &ObjectName) -> String {
    format!("pick_and_place(\"{first}\",")
}

fn nonempty<T>(items: &[T], what: &'static str) -> Result<(), PromptError> {
    if items.is_empty() {
        Err(PromptError::EmptyInput(what))
    } else {
        Ok(())
    }
}

fn check_seen(ex: &ReceptacleExamples) -> Result<(), PromptError> {
    nonempty(&ex.placements, "seen placements")?;
    for p in &ex.placements {
        if !ex.objects.contains(&p.object) {
            return Err(PromptError::UnlistedName(p.object.to_string()));
        }
        if !ex.receptacles.contains(&p.receptacle) {
            return Err(PromptError::UnlistedName(p.receptacle.to_string()));
        }
    }
    Ok(())
}

pub fn build_receptacle_summarization_prompt(
    seen: &ReceptacleExamples,
) -> Result<PromptText, PromptError> {
    check_seen(seen)?;
    let block = format!("{}\n{SUMMARY_MARKER}", seen.render());
    Ok(PromptText::new(
        PromptKind::ReceptacleSummarization,
        with_examples(RECEPTACLE_SUMMARIZATION_EXAMPLES, &block),
    ))
}

fn selection_block(
    summary: &Summary,
    objects: &[ObjectName],
    receptacles: &[ReceptacleName],
) -> Result<String, PromptError> {
    nonempty(objects, "objects")?;
    nonempty(receptacles, "receptacles")?;
    let mut out = Lines::default();
    out.stmt(DslStatement::SummaryComment(summary.text().to_string()));
    out.stmt(DslStatement::ObjectsList(objects.to_vec()));
    out.stmt(DslStatement::ReceptaclesList(receptacles.to_vec()));
    out.raw(partial_call(&objects[0]));
    Ok(out.finish())
}

pub fn build_receptacle_selection_prompt(
    summary: &Summary,
    objects: &[ObjectName],
    receptacles: &[ReceptacleName],
) -> Result<PromptText, PromptError> {
    let block = selection_block(summary, objects, receptacles)?;
    Ok(PromptText::new(
        PromptKind::ReceptacleSelection,
        with_examples(RECEPTACLE_SELECTION_EXAMPLES, &block),
    ))
}

pub fn build_primitive_summarization_prompt(
    seen: &PrimitiveExamples,
) -> Result<PromptText, PromptError> {
    nonempty(&seen.choices, "primitive choices")?;
    for c in &seen.choices {
        if !seen.objects.contains(&c.object) {
            return Err(PromptError::UnlistedName(c.object.to_string()));
        }
    }
    let block = format!("{}\n{SUMMARY_MARKER}", seen.render());
    Ok(PromptText::new(
        PromptKind::PrimitiveSummarization,
        with_examples(PRIMITIVE_SUMMARIZATION_EXAMPLES, &block),
    ))
}

fn primitive_selection_block(
    summary: &Summary,
    objects: &[ObjectName],
) -> Result<String, PromptError> {
    nonempty(objects, "objects")?;
    let mut out = Lines::default();
    out.stmt(DslStatement::SummaryComment(summary.text().to_string()));
    out.stmt(DslStatement::ObjectsList(objects.to_vec()));
    // the model writes whole lines starting on the next line
    out.raw("");
    Ok(out.finish())
}

pub fn build_primitive_selection_prompt(
    summary: &Summary,
    objects: &[ObjectName],
) -> Result<PromptText, PromptError> {
    let block = primitive_selection_block(summary, objects)?;
    Ok(PromptText::new(
        PromptKind::PrimitiveSelection,
        with_examples(PRIMITIVE_SELECTION_EXAMPLES, &block),
    ))
}

pub fn build_category_extraction_prompt(summary: &Summary) -> PromptText {
    let block = format!(
        "{}\n{OBJECT_LIST_OPENING}",
        DslStatement::SummaryComment(summary.text().to_string())
    );
    PromptText::new(
        PromptKind::CategoryExtraction,
        with_examples(CATEGORY_EXTRACTION_EXAMPLES, &block),
    )
}

/// Receptacle- and primitive-selection prompts over category names rather
/// than object instances, for use on the robot.
pub fn build_realworld_selection_prompts(
    receptacle_summary: &Summary,
    primitive_summary: &Summary,
    categories: &[ObjectName],
    receptacles: &[ReceptacleName],
) -> Result<(PromptText, PromptText), PromptError> {
    nonempty(categories, "categories")?;
    let receptacle = selection_block(receptacle_summary, categories, receptacles)?;
    let primitive = primitive_selection_block(primitive_summary, categories)?;
    Ok((
        PromptText::new(
            PromptKind::ReceptacleSelectionReal,
            with_examples(RECEPTACLE_SELECTION_EXAMPLES, &receptacle),
        ),
        PromptText::new(
            PromptKind::PrimitiveSelectionReal,
            with_examples(PRIMITIVE_SELECTION_EXAMPLES, &primitive),
        ),
    ))
}

/// Seen block, blank line, then the target objects with a partial first call.
pub fn build_examples_only_prompt(
    seen: &ReceptacleExamples,
    targets: &[ObjectName],
    receptacles: &[ReceptacleName],
) -> Result<PromptText, PromptError> {
    check_seen(seen)?;
    nonempty(targets, "objects")?;
    nonempty(receptacles, "receptacles")?;
    let mut out = Lines::default();
    out.raw(seen.render());
    out.raw("");
    out.stmt(DslStatement::ObjectsList(targets.to_vec()));
    out.stmt(DslStatement::ReceptaclesList(receptacles.to_vec()));
    out.raw(partial_call(&targets[0]));
    Ok(PromptText::new(PromptKind::ExamplesOnly, out.finish()))
}

pub fn build_commonsense_prompt(
    objects: &[ObjectName],
    receptacles: &[ReceptacleName],
) -> Result<PromptText, PromptError> {
    nonempty(objects, "objects")?;
    nonempty(receptacles, "receptacles")?;
    let mut out = Lines::default();
    out.raw(COMMONSENSE_HEADER);
    out.stmt(DslStatement::ObjectsList(objects.to_vec()));
    out.stmt(DslStatement::ReceptaclesList(receptacles.to_vec()));
    out.raw(partial_call(&objects[0]));
    Ok(PromptText::new(PromptKind::Commonsense, out.finish()))
}
