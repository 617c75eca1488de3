use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Short abbreviation naming a Web API standard (`WEBGL`, `H-WW`, ...).
///
/// Every table in the crate is keyed by this type; ordering is plain byte
/// order so that all emitted tables sort the same way.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Abbrev(String);

impl Abbrev {
    pub fn new(s: impl Into<String>) -> Option<Self> {
        let s = s.into();
        let trimmed = s.trim();
        if trimmed.is_empty() || trimmed.chars().any(char::is_whitespace) {
            return None;
        }
        Some(Abbrev(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Abbrev {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Abbrev {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Abbrev {
    /// Panics on an empty or whitespace-containing abbreviation; use
    /// [`Abbrev::new`] for untrusted input.
    fn from(s: &str) -> Self {
        Abbrev::new(s).unwrap_or_else(|| panic!("invalid standard abbreviation {s:?}"))
    }
}

/// A Web API standard: its full name and the abbreviation used everywhere else.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Standard {
    pub name: String,
    pub abbrev: Abbrev,
}
