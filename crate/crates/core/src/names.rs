//! Validated name newtypes.
//!
//! Names are stored exactly as written. They must be nonempty, free of
//! surrounding whitespace, and must not contain double quotes or line
//! breaks, so that every name can be embedded in a DSL string literal
//! without escaping.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("name is empty")]
    Empty,
    #[error("name {0:?} has leading or trailing whitespace")]
    Untrimmed(String),
    #[error("name {0:?} contains a double quote")]
    Quote(String),
    #[error("name {0:?} contains a line break")]
    LineBreak(String),
}

fn check(text: &str) -> Result<(), NameError> {
    if text.is_empty() {
        return Err(NameError::Empty);
    }
    if text.contains('"') {
        return Err(NameError::Quote(text.to_string()));
    }
    if text.contains(['\n', '\r']) {
        return Err(NameError::LineBreak(text.to_string()));
    }
    if text.trim() != text {
        return Err(NameError::Untrimmed(text.to_string()));
    }
    Ok(())
}

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(text: impl Into<String>) -> Result<Self, NameError> {
                let text = text.into();
                check(&text)?;
                Ok(Self(text))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }

            /// Trimmed, case-folded form used when matching model output
            /// against ground truth. Never stored.
            pub fn normalized(&self) -> String {
                normalize(&self.0)
            }
        }

        impl TryFrom<String> for $name {
            type Error = NameError;
            fn try_from(text: String) -> Result<Self, NameError> {
                Self::new(text)
            }
        }

        impl TryFrom<&str> for $name {
            type Error = NameError;
            fn try_from(text: &str) -> Result<Self, NameError> {
                Self::new(text)
            }
        }

        impl From<$name> for String {
            fn from(name: $name) -> String {
                name.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

name_type!(
    /// An object name such as `dark purple shirt`.
    ObjectName
);
name_type!(
    /// A receptacle name such as `recycling bin`.
    ReceptacleName
);

/// Trim and case-fold.
pub fn normalize(text: &str) -> String {
    text.trim().to_lowercase()
}
