//! Few-shot prompts in a small Pythonic DSL and parsers for the model's
//! completions.
//!
//! In-context examples live in `templates/` and are embedded at compile time;
//! `fixtures/` holds complete golden prompts and completions for the test
//! inputs. Conventions: in-context examples are separated by exactly one
//! blank line, and a prompt ends at its completion point with no trailing
//! newline, except for primitive selection, where the model writes whole
//! lines and the prompt ends with the newline after the objects list.

mod build;
pub mod dsl;
mod parse;
mod prompt;

use thiserror::Error;

pub use build::{
    build_category_extraction_prompt, build_commonsense_prompt, build_examples_only_prompt,
    build_primitive_selection_prompt, build_primitive_summarization_prompt,
    build_realworld_selection_prompts, build_receptacle_selection_prompt,
    build_receptacle_summarization_prompt, PrimitiveExamples, ReceptacleExamples,
    CATEGORY_EXTRACTION_EXAMPLES, COMMONSENSE_HEADER, OBJECT_LIST_OPENING,
    PRIMITIVE_SELECTION_EXAMPLES, PRIMITIVE_SUMMARIZATION_EXAMPLES,
    RECEPTACLE_SELECTION_EXAMPLES, RECEPTACLE_SUMMARIZATION_EXAMPLES,
};
pub use dsl::DslStatement;
pub use parse::{
    parse_object_list, parse_placements, parse_primitive_choices, parse_primitive_examples,
    parse_receptacle_examples, parse_summary, Parsed,
};
pub use prompt::{PromptKind, PromptText, Summary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("invalid name: {0}")]
    InvalidName(#[from] tidyup_core::NameError),
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("{0:?} is not in the listed objects or receptacles")]
    UnlistedName(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("summary text is empty")]
    EmptySummary,
    #[error("summary text spans more than one line")]
    MultilineSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("completion has no summary before the first line break")]
    EmptySummary,
    #[error("partial call does not complete: {0}")]
    Stitch(String),
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate name {0:?} in list")]
    DuplicateName(String),
}
