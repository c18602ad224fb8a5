use std::fmt;

use serde::{Deserialize, Serialize};
use tidyup_core::ObjectName;

use crate::PromptError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    ReceptacleSummarization,
    ReceptacleSelection,
    PrimitiveSummarization,
    PrimitiveSelection,
    CategoryExtraction,
    ReceptacleSelectionReal,
    PrimitiveSelectionReal,
    ExamplesOnly,
    Commonsense,
}

/// Complete prompt text, ending exactly where the model is expected to
/// continue.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptText {
    pub kind: PromptKind,
    pub text: String,
}

impl PromptText {
    pub fn new(kind: PromptKind, text: impl Into<String>) -> Self {
        Self {
            kind,
            text: text.into(),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl fmt::Display for PromptText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// A one-line rule produced by summarization, optionally with the category
/// list extracted from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    text: String,
    categories: Option<Vec<ObjectName>>,
}

impl Summary {
    pub fn new(text: impl Into<String>) -> Result<Self, PromptError> {
        let text = text.into();
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(PromptError::EmptySummary);
        }
        if trimmed.contains(['\n', '\r']) {
            return Err(PromptError::MultilineSummary);
        }
        Ok(Self {
            text: trimmed.to_string(),
            categories: None,
        })
    }

    pub fn with_categories(mut self, categories: Vec<ObjectName>) -> Result<Self, PromptError> {
        if categories.is_empty() {
            return Err(PromptError::EmptyInput("categories"));
        }
        for (i, c) in categories.iter().enumerate() {
            if categories[..i].contains(c) {
                return Err(PromptError::DuplicateName(c.to_string()));
            }
        }
        self.categories = Some(categories);
        Ok(self)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn categories(&self) -> Option<&[ObjectName]> {
        self.categories.as_deref()
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
