//! Completion parsers. None of these panic on arbitrary input: every failure
//! is a typed error or a clean early stop recorded as a warning.

use log::warn;
use tidyup_core::{ObjectName, Placement, Primitive, PrimitiveChoice, ReceptacleName};

use crate::build::{PrimitiveExamples, ReceptacleExamples};
use crate::dsl::{parse_line, parse_string_list, DslStatement, Line};
use crate::prompt::Summary;
use crate::ParseError;

/// Parser output plus any non-fatal observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

const CALL_PREFIX: &str = "pick_and_";

pub fn parse_summary(completion: &str) -> Result<Summary, ParseError> {
    let first = completion.split('\n').next().unwrap_or_default().trim();
    if first.is_empty() {
        return Err(ParseError::EmptySummary);
    }
    Summary::new(first).map_err(|_| ParseError::EmptySummary)
}

/// Outcome of reading one line inside a call block.
enum Step {
    Stmt(DslStatement),
    Stop(Option<String>),
}

fn step(line_no: usize, line: &str) -> Result<Step, ParseError> {
    match parse_line(line) {
        Ok(Line::Statement(s)) => Ok(Step::Stmt(s)),
        Ok(Line::Blank) => Ok(Step::Stop(None)),
        Ok(Line::Unrecognized(what)) => Ok(Step::Stop(Some(format!(
            "line {line_no}: stopped at unrecognized {what}"
        )))),
        Ok(Line::Other) => Ok(Step::Stop(Some(format!(
            "line {line_no}: stopped at non-statement text"
        )))),
        Err(e) if line.trim_start().starts_with(CALL_PREFIX) => Err(ParseError::Syntax {
            line: line_no,
            message: e.to_string(),
        }),
        Err(e) => Ok(Step::Stop(Some(format!(
            "line {line_no}: stopped at unparsable text ({e})"
        )))),
    }
}

fn stop_warning(warnings: &mut Vec<String>, w: Option<String>) {
    if let Some(w) = w {
        warn!("{w}");
        warnings.push(w);
    }
}

/// Stitch the partial first call onto the completion and read consecutive
/// two-argument `pick_and_place` lines.
pub fn parse_placements(
    first_object: &ObjectName,
    completion: &str,
) -> Result<Parsed<Vec<Placement>>, ParseError> {
    let stitched = format!("pick_and_place(\"{first_object}\",{completion}");
    let mut lines = stitched.split('\n');
    let first = lines.next().unwrap_or_default();
    let head = match parse_line(first) {
        Ok(Line::Statement(DslStatement::PickAndPlace2(o, r))) => Placement::new(o, r),
        Ok(other) => {
            return Err(ParseError::Stitch(format!(
                "first line {first:?} is not a two-argument placement ({other:?})"
            )))
        }
        Err(e) => return Err(ParseError::Stitch(format!("first line {first:?}: {e}"))),
    };

    let mut value = vec![head];
    let mut warnings = Vec::new();
    for (i, line) in lines.enumerate() {
        match step(i + 2, line)? {
            Step::Stmt(DslStatement::PickAndPlace2(o, r)) => value.push(Placement::new(o, r)),
            Step::Stmt(other) => {
                stop_warning(
                    &mut warnings,
                    Some(format!("line {}: stopped at {other}", i + 2)),
                );
                break;
            }
            Step::Stop(w) => {
                stop_warning(&mut warnings, w);
                break;
            }
        }
    }
    Ok(Parsed { value, warnings })
}

/// Read consecutive one-argument primitive calls. Leading blank lines are
/// skipped.
pub fn parse_primitive_choices(completion: &str) -> Result<Parsed<Vec<PrimitiveChoice>>, ParseError> {
    let mut value = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in completion.split('\n').enumerate() {
        if value.is_empty() && line.trim().is_empty() {
            continue;
        }
        match step(i + 1, line)? {
            Step::Stmt(DslStatement::PickAndPlace1(o)) => {
                value.push(PrimitiveChoice::new(o, Primitive::Place))
            }
            Step::Stmt(DslStatement::PickAndToss1(o)) => {
                value.push(PrimitiveChoice::new(o, Primitive::Toss))
            }
            Step::Stmt(other) => {
                stop_warning(
                    &mut warnings,
                    Some(format!("line {}: stopped at {other}", i + 1)),
                );
                break;
            }
            Step::Stop(w) => {
                stop_warning(&mut warnings, w);
                break;
            }
        }
    }
    Ok(Parsed { value, warnings })
}

/// Stitch the prompt's trailing list opening (e.g. `objects = ["`) onto the
/// completion and read one list of names.
pub fn parse_object_list(prefix: &str, completion: &str) -> Result<Vec<ObjectName>, ParseError> {
    let stitched = format!("{prefix}{completion}");
    let items = parse_string_list(&stitched).map_err(|e| ParseError::Syntax {
        line: 1,
        message: e.to_string(),
    })?;
    if items.is_empty() {
        return Err(ParseError::Syntax {
            line: 1,
            message: "empty list".into(),
        });
    }
    let mut out: Vec<ObjectName> = Vec::with_capacity(items.len());
    for item in items {
        let name = ObjectName::new(item).map_err(|e| ParseError::Syntax {
            line: 1,
            message: format!("invalid name: {e}"),
        })?;
        if out.contains(&name) {
            return Err(ParseError::DuplicateName(name.to_string()));
        }
        out.push(name);
    }
    Ok(out)
}

fn block_statements(text: &str) -> Result<Vec<(usize, DslStatement)>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match parse_line(line) {
            Ok(Line::Statement(s)) => out.push((i + 1, s)),
            Ok(Line::Blank) => {}
            Ok(Line::Unrecognized(what)) => {
                return Err(ParseError::Syntax {
                    line: i + 1,
                    message: format!("unexpected {what}"),
                })
            }
            Ok(Line::Other) => {
                return Err(ParseError::Syntax {
                    line: i + 1,
                    message: "not a statement".into(),
                })
            }
            Err(e) => {
                return Err(ParseError::Syntax {
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

fn misplaced(line: usize, s: &DslStatement) -> ParseError {
    ParseError::Syntax {
        line,
        message: format!("unexpected statement {s}"),
    }
}

/// Parse a rendered seen block (`objects = ...`, `receptacles = ...`, then
/// two-argument placements). Exact inverse of [`ReceptacleExamples::render`].
pub fn parse_receptacle_examples(text: &str) -> Result<ReceptacleExamples, ParseError> {
    let mut objects: Option<Vec<ObjectName>> = None;
    let mut receptacles: Option<Vec<ReceptacleName>> = None;
    let mut placements = Vec::new();
    for (line, s) in block_statements(text)? {
        match s {
            DslStatement::ObjectsList(v) if objects.is_none() => objects = Some(v),
            DslStatement::ReceptaclesList(v) if receptacles.is_none() => receptacles = Some(v),
            DslStatement::PickAndPlace2(o, r) => placements.push(Placement::new(o, r)),
            other => return Err(misplaced(line, &other)),
        }
    }
    if placements.is_empty() {
        return Err(ParseError::Syntax {
            line: 1,
            message: "no placements in example block".into(),
        });
    }
    let objects = objects.unwrap_or_else(|| placements.iter().map(|p| p.object.clone()).collect());
    let receptacles = receptacles.unwrap_or_else(|| {
        let mut seen: Vec<ReceptacleName> = Vec::new();
        for p in &placements {
            if !seen.contains(&p.receptacle) {
                seen.push(p.receptacle.clone());
            }
        }
        seen
    });
    Ok(ReceptacleExamples {
        objects,
        receptacles,
        placements,
    })
}

/// Parse a rendered primitive example block (`objects = ...` then
/// one-argument calls).
pub fn parse_primitive_examples(text: &str) -> Result<PrimitiveExamples, ParseError> {
    let mut objects: Option<Vec<ObjectName>> = None;
    let mut choices = Vec::new();
    for (line, s) in block_statements(text)? {
        match s {
            DslStatement::ObjectsList(v) if objects.is_none() => objects = Some(v),
            DslStatement::PickAndPlace1(o) => choices.push(PrimitiveChoice::new(o, Primitive::Place)),
            DslStatement::PickAndToss1(o) => choices.push(PrimitiveChoice::new(o, Primitive::Toss)),
            other => return Err(misplaced(line, &other)),
        }
    }
    if choices.is_empty() {
        return Err(ParseError::Syntax {
            line: 1,
            message: "no primitive calls in example block".into(),
        });
    }
    let objects = objects.unwrap_or_else(|| choices.iter().map(|c| c.object.clone()).collect());
    Ok(PrimitiveExamples { objects, choices })
}
