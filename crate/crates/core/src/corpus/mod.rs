//! Bibliographic ingestion: AMiner parsing, cleaning, frozen snapshots and
//! temporal splits.

mod aminer;
mod clean;
mod record;
mod snapshot;
mod split;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use aminer::{
    parse_aminer, parse_bytes, parse_jsonl, read_corpus_file, write_aminer, write_jsonl, Diagnostic, DiagnosticKind,
    ParseOutput,
};
pub use clean::{clean, CleanConfig, CleanReport};
pub use record::{PaperId, PaperRecord};
pub use snapshot::{build_snapshot, Authorship, CorpusSnapshot};
pub use split::{temporal_split, test_size, CaseLabel, CaseSpec, SplitSpec, TEST_FRACTION};

use crate::persist::{self, PersistError, SNAPSHOT_FORMAT};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown paper id {0}")]
    UnknownPaper(PaperId),
    #[error("invalid window [{from_year}, {to_year}] for snapshot cut at {cutoff_year}")]
    InvalidWindow { from_year: i32, to_year: i32, cutoff_year: i32 },
    #[error("no papers published in [{start}, {end}]")]
    EmptyWindow { start: i32, end: i32 },
    #[error(transparent)]
    Persist(#[from] PersistError),
}

/// Cleaned records plus the cleaning report, persisted by `ingest`.
/// Snapshots at any cutoff are rebuilt from it deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusCache {
    pub records: Vec<PaperRecord>,
    pub report: CleanReport,
    pub diagnostics: Vec<Diagnostic>,
}

impl CorpusCache {
    pub fn max_year(&self) -> Option<i32> {
        self.records.iter().map(|r| r.year).max()
    }

    pub fn snapshot(&self, cutoff_year: i32) -> CorpusSnapshot {
        build_snapshot(&self.records, cutoff_year)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        Ok(persist::save(SNAPSHOT_FORMAT, self, path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        Ok(persist::load(SNAPSHOT_FORMAT, path)?)
    }
}

/// Parse, clean and package a corpus file.
pub fn ingest_file(path: impl AsRef<Path>, config: &CleanConfig) -> Result<CorpusCache, CorpusError> {
    let parsed = read_corpus_file(path)?;
    let (records, report) = clean(parsed.records, config);
    Ok(CorpusCache { records, report, diagnostics: parsed.diagnostics })
}
