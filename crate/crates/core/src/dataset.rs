//! Benchmark dataset file format, loader, and validator.
//!
//! The file is a JSON object tree:
//!
//! ```json
//! {"scenarios": [{
//!     "id": "bedroom-01",
//!     "room_type": "bedroom",
//!     "receptacles": ["drawer", "closet"],
//!     "seen": [{"object": "yellow shirt", "receptacle": "drawer", "primitive": "place"}],
//!     "unseen": [...],
//!     "criteria": ["attribute"]
//! }]}
//! ```
//!
//! `primitive` is optional per entry; a split either annotates every entry or
//! none of them.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::names::{ObjectName, ReceptacleName};
use crate::types::{
    Dataset, Placement, Primitive, PrimitiveChoice, RoomType, Scenario, SortingCriterion, Split,
};

/// Scenarios per room type in the full-scale benchmark.
pub const FULL_SCALE_PER_ROOM: usize = 24;

pub const MIN_RECEPTACLES: usize = 2;
pub const MAX_RECEPTACLES: usize = 5;
pub const MIN_SEEN: usize = 4;
pub const MAX_SEEN: usize = 10;
pub const PLACEMENTS_PER_RECEPTACLE: usize = 2;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("dataset failed validation:\n{0}")]
    Validation(ValidationReport),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetRecord {
    scenarios: Vec<ScenarioRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioRecord {
    id: String,
    room_type: RoomType,
    receptacles: Vec<ReceptacleName>,
    seen: Vec<PlacementRecord>,
    unseen: Vec<PlacementRecord>,
    criteria: Vec<SortingCriterion>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementRecord {
    object: ObjectName,
    receptacle: ReceptacleName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    primitive: Option<Primitive>,
}

fn split_from_records(
    records: Vec<PlacementRecord>,
) -> (Vec<Placement>, Option<Vec<PrimitiveChoice>>) {
    let mut placements = Vec::with_capacity(records.len());
    let mut choices = Vec::new();
    for r in records {
        if let Some(p) = r.primitive {
            choices.push(PrimitiveChoice::new(r.object.clone(), p));
        }
        placements.push(Placement::new(r.object, r.receptacle));
    }
    // A partially annotated split keeps the annotations it has; the validator
    // then reports the coverage gap.
    let choices = if choices.is_empty() { None } else { Some(choices) };
    (placements, choices)
}

fn split_to_records(
    placements: &[Placement],
    choices: Option<&[PrimitiveChoice]>,
) -> Vec<PlacementRecord> {
    let lookup: HashMap<&ObjectName, Primitive> = choices
        .unwrap_or_default()
        .iter()
        .map(|c| (&c.object, c.primitive))
        .collect();
    placements
        .iter()
        .map(|p| PlacementRecord {
            object: p.object.clone(),
            receptacle: p.receptacle.clone(),
            primitive: lookup.get(&p.object).copied(),
        })
        .collect()
}

impl From<ScenarioRecord> for Scenario {
    fn from(r: ScenarioRecord) -> Self {
        let (seen, seen_primitives) = split_from_records(r.seen);
        let (unseen, unseen_primitives) = split_from_records(r.unseen);
        Scenario {
            id: r.id,
            room_type: r.room_type,
            receptacles: r.receptacles,
            seen,
            unseen,
            seen_primitives,
            unseen_primitives,
            criteria: r.criteria.into_iter().collect(),
        }
    }
}

impl From<&Scenario> for ScenarioRecord {
    fn from(s: &Scenario) -> Self {
        ScenarioRecord {
            id: s.id.clone(),
            room_type: s.room_type,
            receptacles: s.receptacles.clone(),
            seen: split_to_records(&s.seen, s.seen_primitives.as_deref()),
            unseen: split_to_records(&s.unseen, s.unseen_primitives.as_deref()),
            criteria: s.criteria.iter().copied().collect(),
        }
    }
}

/// Parse dataset text without validating scenario invariants.
pub fn parse_dataset(text: &str) -> Result<Dataset, DatasetError> {
    let record: DatasetRecord = serde_json::from_str(text).map_err(|e| DatasetError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(Dataset {
        scenarios: record.scenarios.into_iter().map(Scenario::from).collect(),
    })
}

/// Load and validate a dataset file.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let ds = parse_dataset(&text)?;
    let report = validate_dataset(&ds);
    if report.is_valid() {
        Ok(ds)
    } else {
        Err(DatasetError::Validation(report))
    }
}

impl Dataset {
    /// Canonical pretty-printed file text.
    pub fn to_json(&self) -> String {
        let record = DatasetRecord {
            scenarios: self.scenarios.iter().map(ScenarioRecord::from).collect(),
        };
        let mut text = serde_json::to_string_pretty(&record).expect("dataset serializes");
        text.push('\n');
        text
    }
}

/// Named scenario invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    DuplicateScenarioId,
    ReceptacleCount,
    DuplicateReceptacle,
    SeenCount,
    SplitSizeMismatch,
    UnknownReceptacle,
    PlacementsPerReceptacle,
    DuplicateObject,
    SplitsDisjoint,
    PrimitiveCoverage,
    MissingCriteria,
}

impl Invariant {
    pub fn description(self) -> &'static str {
        match self {
            Invariant::DuplicateScenarioId => "scenario ids must be unique",
            Invariant::ReceptacleCount => "a scenario has 2 to 5 receptacles",
            Invariant::DuplicateReceptacle => "receptacle names are unique within a scenario",
            Invariant::SeenCount => "a scenario has 4 to 10 seen placements",
            Invariant::SplitSizeMismatch => "seen and unseen splits have equal size",
            Invariant::UnknownReceptacle => "placements reference listed receptacles only",
            Invariant::PlacementsPerReceptacle => {
                "every receptacle has exactly 2 seen and 2 unseen placements"
            }
            Invariant::DuplicateObject => "object names are unique within a split",
            Invariant::SplitsDisjoint => "seen and unseen object names are disjoint",
            Invariant::PrimitiveCoverage => {
                "primitive annotations cover every object of their split exactly once"
            }
            Invariant::MissingCriteria => "a scenario carries at least one sorting criterion",
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.description())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub scenario_id: String,
    pub invariant: Invariant,
    pub detail: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.scenario_id, self.invariant, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub scenarios: usize,
    pub per_room_type: BTreeMap<RoomType, usize>,
    pub seen_placements: usize,
    pub unseen_placements: usize,
    pub unique_objects: usize,
    pub unique_receptacles: usize,
    pub criteria: BTreeMap<SortingCriterion, usize>,
}

/// Result of validating a dataset. `findings` is empty iff the dataset is
/// valid; `warnings` never affect validity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub warnings: Vec<String>,
    pub stats: DatasetStats,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "error: {finding}")?;
        }
        for warning in &self.warnings {
            writeln!(f, "warning: {warning}")?;
        }
        let s = &self.stats;
        writeln!(f, "scenarios: {}", s.scenarios)?;
        for (room, n) in &s.per_room_type {
            writeln!(f, "  {room}: {n}")?;
        }
        writeln!(f, "seen placements: {}", s.seen_placements)?;
        writeln!(f, "unseen placements: {}", s.unseen_placements)?;
        writeln!(f, "unique objects: {}", s.unique_objects)?;
        writeln!(f, "unique receptacles: {}", s.unique_receptacles)?;
        write!(f, "criteria:")?;
        for c in SortingCriterion::ALL {
            write!(f, " {}={}/{}", c, s.criteria.get(&c).unwrap_or(&0), s.scenarios)?;
        }
        writeln!(f)
    }
}

/// Per-criterion scenario counts. A scenario counts once for every criterion
/// it is tagged with.
pub fn criteria_tally(ds: &Dataset) -> BTreeMap<SortingCriterion, usize> {
    let mut tally: BTreeMap<SortingCriterion, usize> =
        SortingCriterion::ALL.iter().map(|c| (*c, 0)).collect();
    for s in &ds.scenarios {
        for c in &s.criteria {
            *tally.entry(*c).or_default() += 1;
        }
    }
    tally
}

fn stats(ds: &Dataset) -> DatasetStats {
    let mut per_room_type: BTreeMap<RoomType, usize> = BTreeMap::new();
    let mut objects = HashSet::new();
    let mut receptacles = HashSet::new();
    let mut seen = 0;
    let mut unseen = 0;
    for s in &ds.scenarios {
        *per_room_type.entry(s.room_type).or_default() += 1;
        seen += s.seen.len();
        unseen += s.unseen.len();
        receptacles.extend(s.receptacles.iter().map(|r| r.as_str()));
        objects.extend(s.seen.iter().chain(&s.unseen).map(|p| p.object.as_str()));
    }
    DatasetStats {
        scenarios: ds.scenarios.len(),
        per_room_type,
        seen_placements: seen,
        unseen_placements: unseen,
        unique_objects: objects.len(),
        unique_receptacles: receptacles.len(),
        criteria: criteria_tally(ds),
    }
}

/// Check every scenario invariant and collect all violations.
pub fn validate_dataset(ds: &Dataset) -> ValidationReport {
    let mut findings = Vec::new();
    let mut ids = HashSet::new();
    for s in &ds.scenarios {
        if !ids.insert(s.id.as_str()) {
            findings.push(Finding {
                scenario_id: s.id.clone(),
                invariant: Invariant::DuplicateScenarioId,
                detail: format!("id {:?} appears more than once", s.id),
            });
        }
        validate_scenario(s, &mut findings);
    }

    let stats = stats(ds);
    let mut warnings = Vec::new();
    for room in RoomType::ALL {
        let n = stats.per_room_type.get(&room).copied().unwrap_or(0);
        if n != FULL_SCALE_PER_ROOM {
            warnings.push(format!(
                "{room}: {n} scenarios (full-scale benchmark has {FULL_SCALE_PER_ROOM})"
            ));
        }
    }
    ValidationReport {
        findings,
        warnings,
        stats,
    }
}

fn validate_scenario(s: &Scenario, out: &mut Vec<Finding>) {
    let mut push = |invariant: Invariant, detail: String| {
        out.push(Finding {
            scenario_id: s.id.clone(),
            invariant,
            detail,
        })
    };

    let n_rec = s.receptacles.len();
    if !(MIN_RECEPTACLES..=MAX_RECEPTACLES).contains(&n_rec) {
        push(Invariant::ReceptacleCount, format!("{n_rec} receptacles"));
    }
    let mut listed = BTreeSet::new();
    for r in &s.receptacles {
        if !listed.insert(r) {
            push(Invariant::DuplicateReceptacle, format!("{r:?} listed twice"));
        }
    }

    if !(MIN_SEEN..=MAX_SEEN).contains(&s.seen.len()) {
        push(Invariant::SeenCount, format!("{} seen placements", s.seen.len()));
    }
    if s.seen.len() != s.unseen.len() {
        push(
            Invariant::SplitSizeMismatch,
            format!("{} seen vs {} unseen", s.seen.len(), s.unseen.len()),
        );
    }

    for split in [Split::Seen, Split::Unseen] {
        let placements = s.placements(split);
        let mut counts: BTreeMap<&ReceptacleName, usize> =
            s.receptacles.iter().map(|r| (r, 0)).collect();
        for p in placements {
            match counts.get_mut(&p.receptacle) {
                Some(n) => *n += 1,
                None => push(
                    Invariant::UnknownReceptacle,
                    format!("{split} placement of {:?} uses {:?}", p.object, p.receptacle),
                ),
            }
        }
        for (r, n) in counts {
            if n != PLACEMENTS_PER_RECEPTACLE {
                push(
                    Invariant::PlacementsPerReceptacle,
                    format!("{r:?} has {n} {split} placements"),
                );
            }
        }

        let mut names = HashSet::new();
        for p in placements {
            if !names.insert(&p.object) {
                push(
                    Invariant::DuplicateObject,
                    format!("{:?} appears twice in {split}", p.object),
                );
            }
        }

        if let Some(choices) = s.primitives(split) {
            let expected: Vec<&ObjectName> = placements.iter().map(|p| &p.object).collect();
            let mut got: Vec<&ObjectName> = choices.iter().map(|c| &c.object).collect();
            let mut want = expected.clone();
            got.sort();
            want.sort();
            if got != want {
                push(
                    Invariant::PrimitiveCoverage,
                    format!(
                        "{split} has {} primitive annotations for {} objects",
                        choices.len(),
                        placements.len()
                    ),
                );
            }
        }
    }

    let seen: HashSet<&ObjectName> = s.seen.iter().map(|p| &p.object).collect();
    for p in &s.unseen {
        if seen.contains(&p.object) {
            push(
                Invariant::SplitsDisjoint,
                format!("{:?} is both seen and unseen", p.object),
            );
        }
    }

    if s.criteria.is_empty() {
        push(Invariant::MissingCriteria, "no criteria".to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn shirts_json() -> String {
        r#"{"scenarios": [{
            "id": "shirts",
            "room_type": "bedroom",
            "receptacles": ["drawer", "closet"],
            "seen": [
                {"object": "yellow shirt", "receptacle": "drawer"},
                {"object": "dark purple shirt", "receptacle": "closet"},
                {"object": "white socks", "receptacle": "drawer"},
                {"object": "black shirt", "receptacle": "closet"}
            ],
            "unseen": [
                {"object": "black socks", "receptacle": "closet"},
                {"object": "white shirt", "receptacle": "drawer"},
                {"object": "navy socks", "receptacle": "closet"},
                {"object": "beige shirt", "receptacle": "drawer"}
            ],
            "criteria": ["attribute"]
        }]}"#
            .to_string()
    }

    fn shirts() -> Dataset {
        parse_dataset(&shirts_json()).unwrap()
    }

    fn invariants(report: &ValidationReport) -> Vec<Invariant> {
        report.findings.iter().map(|f| f.invariant).collect()
    }

    #[test]
    fn valid_scenario_has_empty_report() {
        let report = validate_dataset(&shirts());
        assert!(report.is_valid(), "{report}");
        assert_eq!(report.stats.seen_placements, 4);
        // fixture is smaller than the full benchmark
        assert_eq!(report.warnings.len(), 4);
    }

    #[test]
    fn unknown_receptacle_is_reported() {
        let mut ds = shirts();
        ds.scenarios[0].seen[0].receptacle = ReceptacleName::new("shelf").unwrap();
        let report = validate_dataset(&ds);
        assert!(invariants(&report).contains(&Invariant::UnknownReceptacle));
        assert!(report.findings.iter().all(|f| f.scenario_id == "shirts"));
    }

    #[test]
    fn three_seen_in_one_receptacle_is_reported() {
        let mut ds = shirts();
        ds.scenarios[0].seen[1].receptacle = ReceptacleName::new("drawer").unwrap();
        let report = validate_dataset(&ds);
        assert!(invariants(&report).contains(&Invariant::PlacementsPerReceptacle));
    }

    #[test]
    fn seen_unseen_overlap_is_one_finding() {
        let mut ds = shirts();
        let apple = ObjectName::new("apple").unwrap();
        ds.scenarios[0].seen[0].object = apple.clone();
        ds.scenarios[0].unseen[1].object = apple;
        let report = validate_dataset(&ds);
        assert_eq!(invariants(&report), vec![Invariant::SplitsDisjoint]);
    }

    #[test]
    fn count_limits() {
        let mut ds = shirts();
        ds.scenarios[0].unseen.pop();
        ds.scenarios[0].criteria.clear();
        let got = invariants(&validate_dataset(&ds));
        assert!(got.contains(&Invariant::SplitSizeMismatch));
        assert!(got.contains(&Invariant::MissingCriteria));
    }

    #[test]
    fn duplicate_scenario_ids() {
        let mut ds = shirts();
        ds.scenarios.push(ds.scenarios[0].clone());
        assert_eq!(
            invariants(&validate_dataset(&ds)),
            vec![Invariant::DuplicateScenarioId]
        );
    }

    #[test]
    fn partial_primitive_annotations() {
        let text = shirts_json().replacen(
            r#""receptacle": "drawer"}"#,
            r#""receptacle": "drawer", "primitive": "place"}"#,
            1,
        );
        let ds = parse_dataset(&text).unwrap();
        assert_eq!(
            invariants(&validate_dataset(&ds)),
            vec![Invariant::PrimitiveCoverage]
        );
    }

    #[test]
    fn parse_error_has_locus() {
        let err = parse_dataset("{\"scenarios\": [\n  {\"id\": 3}]}").unwrap_err();
        match err {
            DatasetError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_names_are_parse_errors() {
        let text = shirts_json().replace("yellow shirt", "yellow\\\"shirt");
        assert!(matches!(parse_dataset(&text), Err(DatasetError::Parse { .. })));
    }

    #[test]
    fn tally_counts_each_tag() {
        let mut ds = shirts();
        let mut second = ds.scenarios[0].clone();
        second.id = "b".into();
        second.criteria.insert(SortingCriterion::Category);
        ds.scenarios.push(second);
        let t = criteria_tally(&ds);
        assert_eq!(t[&SortingCriterion::Attribute], 2);
        assert_eq!(t[&SortingCriterion::Category], 1);
        assert_eq!(t[&SortingCriterion::Function], 0);
    }
}
