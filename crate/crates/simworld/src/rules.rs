//! Per-category receptacle and primitive rules, resolved once before an
//! episode starts.

use std::collections::BTreeMap;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use tidyup_core::{ObjectName, Placement, Primitive, PrimitiveChoice, ReceptacleName};
use tidyup_llmbackend::{CompletionBackend, DecodingParams};
use tidyup_promptkit::{
    build_category_extraction_prompt, build_primitive_summarization_prompt,
    build_realworld_selection_prompts, build_receptacle_summarization_prompt, parse_object_list,
    parse_placements, parse_primitive_choices, parse_summary, PrimitiveExamples, ReceptacleExamples,
    Summary, OBJECT_LIST_OPENING,
};

use crate::world::{ExampleSpec, WorldFile};
use crate::SimError;

/// The user's preferences as the language model sees them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rules {
    pub receptacle_summary: String,
    pub primitive_summary: String,
    pub categories: Vec<ObjectName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleEntry {
    pub category: ObjectName,
    pub receptacle: ReceptacleName,
    pub primitive: Primitive,
}

/// Category → (receptacle, primitive). The category list is the
/// classifier's label set; a category may lack an entry when the model
/// skipped it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleTable {
    categories: Vec<ObjectName>,
    entries: BTreeMap<String, RuleEntry>,
    pub warnings: Vec<String>,
}

impl RuleTable {
    pub fn new(categories: Vec<ObjectName>, entries: Vec<RuleEntry>) -> Result<Self, SimError> {
        if categories.is_empty() {
            return Err(SimError::Config("rule table needs at least one category".into()));
        }
        let mut map = BTreeMap::new();
        for e in entries {
            let key = e.category.normalized();
            if !categories.iter().any(|c| c.normalized() == key) {
                return Err(SimError::Config(format!("rule for unlisted category {:?}", e.category.as_str())));
            }
            if map.insert(key, e.clone()).is_some() {
                return Err(SimError::Config(format!("two rules for category {:?}", e.category.as_str())));
            }
        }
        Ok(Self {
            categories,
            entries: map,
            warnings: Vec::new(),
        })
    }

    /// Rules read off the world's ground truth, categories in first
    /// appearance order.
    pub fn from_ground_truth(world: &WorldFile) -> Result<Self, SimError> {
        let mut categories: Vec<ObjectName> = Vec::new();
        let mut entries: Vec<RuleEntry> = Vec::new();
        for o in &world.objects {
            let key = o.category.normalized();
            match entries.iter().find(|e| e.category.normalized() == key) {
                Some(e) if e.receptacle != o.receptacle || e.primitive != o.primitive => {
                    return Err(SimError::Config(format!(
                        "category {:?} has conflicting ground truth",
                        o.category.as_str()
                    )))
                }
                Some(_) => {}
                None => {
                    categories.push(o.category.clone());
                    entries.push(RuleEntry {
                        category: o.category.clone(),
                        receptacle: o.receptacle.clone(),
                        primitive: o.primitive,
                    });
                }
            }
        }
        Self::new(categories, entries)
    }

    pub fn categories(&self) -> &[ObjectName] {
        &self.categories
    }

    pub fn get(&self, category: &ObjectName) -> Option<&RuleEntry> {
        self.entries.get(&category.normalized())
    }

    pub fn entries(&self) -> impl Iterator<Item = &RuleEntry> {
        self.entries.values()
    }
}

/// A rules file holds either summaries to resolve with the model or a
/// finished table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RulesFile {
    Summaries(Rules),
    Table {
        categories: Vec<ObjectName>,
        table: Vec<RuleEntry>,
    },
}

impl RulesFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))
    }
}

fn summary(text: &str) -> Result<Summary, SimError> {
    Ok(Summary::new(text)?)
}

/// Ask the model once per category for a receptacle and a primitive.
pub fn resolve_rules(
    rules: &Rules,
    receptacles: &[ReceptacleName],
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> Result<RuleTable, SimError> {
    let (rp, pp) = build_realworld_selection_prompts(
        &summary(&rules.receptacle_summary)?,
        &summary(&rules.primitive_summary)?,
        &rules.categories,
        receptacles,
    )?;
    let placed = parse_placements(&rules.categories[0], &backend.complete(&rp, params)?.completion)?;
    let chosen = parse_primitive_choices(&backend.complete(&pp, params)?.completion)?;
    let mut warnings: Vec<String> = placed.warnings.into_iter().chain(chosen.warnings).collect();
    let mut entries = Vec::new();
    for c in &rules.categories {
        let key = c.normalized();
        let r = placed.value.iter().find(|p| p.object.normalized() == key);
        let p = chosen.value.iter().find(|p| p.object.normalized() == key);
        match (r, p) {
            (Some(r), Some(p)) => entries.push(RuleEntry {
                category: c.clone(),
                receptacle: r.receptacle.clone(),
                primitive: p.primitive,
            }),
            _ => {
                let w = format!("no complete rule for category {:?}", c.as_str());
                warn!("{w}");
                warnings.push(w);
            }
        }
    }
    let mut table = RuleTable::new(rules.categories.clone(), entries)?;
    table.warnings = warnings;
    Ok(table)
}

/// Summaries and categories from seen examples: receptacle summary, then
/// category extraction, then primitive summary.
pub fn derive_rules(
    examples: &[ExampleSpec],
    receptacles: &[ReceptacleName],
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
) -> Result<Rules, SimError> {
    if examples.is_empty() {
        return Err(SimError::Config("the world file has no seen examples".into()));
    }
    let placements = examples
        .iter()
        .map(|e| Placement::new(e.object.clone(), e.receptacle.clone()))
        .collect();
    let seen = ReceptacleExamples::from_placements(placements, receptacles.to_vec());
    let prompt = build_receptacle_summarization_prompt(&seen)?;
    let rec = parse_summary(&backend.complete(&prompt, params)?.completion)?;

    let prompt = build_category_extraction_prompt(&rec);
    let categories = parse_object_list(OBJECT_LIST_OPENING, &backend.complete(&prompt, params)?.completion)?;

    let prims = PrimitiveExamples {
        objects: examples.iter().map(|e| e.object.clone()).collect(),
        choices: examples
            .iter()
            .map(|e| PrimitiveChoice::new(e.object.clone(), e.primitive))
            .collect(),
    };
    let prompt = build_primitive_summarization_prompt(&prims)?;
    let prim = parse_summary(&backend.complete(&prompt, params)?.completion)?;
    Ok(Rules {
        receptacle_summary: rec.text().to_string(),
        primitive_summary: prim.text().to_string(),
        categories,
    })
}
