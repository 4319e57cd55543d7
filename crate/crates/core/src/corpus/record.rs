use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Paper identifier as carried by the `#index` line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PaperId(pub u64);

impl fmt::Display for PaperId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for PaperId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse().map(PaperId)
    }
}

impl From<u64> for PaperId {
    fn from(v: u64) -> Self {
        PaperId(v)
    }
}

/// One bibliographic entry.
///
/// `affiliations` is either empty (not provided) or aligned with `authors`;
/// `None` entries are the missing-value marker written by cleaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: PaperId,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub affiliations: Vec<Option<String>>,
    #[serde(default)]
    pub venue: String,
    pub year: i32,
    #[serde(default)]
    pub references: Vec<PaperId>,
}

impl PaperRecord {
    pub fn new(id: impl Into<PaperId>, year: i32) -> Self {
        PaperRecord {
            id: id.into(),
            title: String::new(),
            abstract_text: String::new(),
            authors: Vec::new(),
            affiliations: Vec::new(),
            venue: String::new(),
            year,
            references: Vec::new(),
        }
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn with_authors<S: Into<String>>(mut self, authors: impl IntoIterator<Item = S>) -> Self {
        self.authors = authors.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_venue(mut self, venue: impl Into<String>) -> Self {
        self.venue = venue.into();
        self
    }

    pub fn with_references<I: Into<PaperId>>(mut self, refs: impl IntoIterator<Item = I>) -> Self {
        self.references = refs.into_iter().map(Into::into).collect();
        self
    }

    /// Removes duplicate and self references, keeping first occurrences.
    /// Returns `(duplicates_removed, self_references_removed)`.
    pub fn normalize_references(&mut self) -> (usize, usize) {
        let mut seen = std::collections::HashSet::with_capacity(self.references.len());
        let own = self.id;
        let before = self.references.len();
        let mut self_refs = 0;
        self.references.retain(|r| {
            if *r == own {
                self_refs += 1;
                false
            } else {
                seen.insert(*r)
            }
        });
        (before - self.references.len() - self_refs, self_refs)
    }
}
