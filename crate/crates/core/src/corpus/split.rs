use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::record::PaperId;
use super::snapshot::CorpusSnapshot;
use super::CorpusError;
use crate::seed;

/// Share of an in-window sample held out for testing.
pub const TEST_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    #[serde(rename = "1yr")]
    OneYear,
    #[serde(rename = "5yr")]
    FiveYear,
    #[serde(rename = "10yr")]
    TenYear,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseLabel::OneYear => "1yr",
            CaseLabel::FiveYear => "5yr",
            CaseLabel::TenYear => "10yr",
            CaseLabel::Custom => "custom",
        })
    }
}

impl FromStr for CaseLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1yr" => Ok(CaseLabel::OneYear),
            "5yr" => Ok(CaseLabel::FiveYear),
            "10yr" => Ok(CaseLabel::TenYear),
            "custom" => Ok(CaseLabel::Custom),
            other => Err(format!("unknown case {other:?} (expected 1yr, 5yr, 10yr or custom)")),
        }
    }
}

/// Publication window plus prediction horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub label: CaseLabel,
    pub window: (i32, i32),
    pub horizon_years: i32,
}

impl CaseSpec {
    /// The three standard cases: 2010 papers with a one-year horizon, 2006
    /// with five years, 2001 with ten.
    pub fn standard(label: CaseLabel) -> Option<CaseSpec> {
        let (year, horizon_years) = match label {
            CaseLabel::OneYear => (2010, 1),
            CaseLabel::FiveYear => (2006, 5),
            CaseLabel::TenYear => (2001, 10),
            CaseLabel::Custom => return None,
        };
        Some(CaseSpec { label, window: (year, year), horizon_years })
    }

    pub fn custom(window: (i32, i32), horizon_years: i32) -> CaseSpec {
        CaseSpec { label: CaseLabel::Custom, window, horizon_years }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.window.0 <= year && year <= self.window.1
    }

    /// Snapshot cutoff used for features: the end of the window.
    pub fn feature_cutoff(&self) -> i32 {
        self.window.1
    }

    /// Last year that can contribute to any target in this case.
    pub fn target_cutoff(&self) -> i32 {
        self.window.1 + self.horizon_years
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub case: CaseSpec,
    pub train_ids: Vec<PaperId>,
    pub test_ids: Vec<PaperId>,
}

/// Number of test samples for `n` in-window papers.
pub fn test_size(n: usize) -> usize {
    let raw = (n as f64 * TEST_FRACTION).round() as usize;
    if n >= 2 {
        raw.clamp(1, n - 1)
    } else {
        0
    }
}

/// Shuffles every in-window paper with `seed` and splits 90/10.
pub fn temporal_split(snapshot: &CorpusSnapshot, case: CaseSpec, seed: u64) -> Result<SplitSpec, CorpusError> {
    let mut ids: Vec<PaperId> = snapshot.papers.values().filter(|p| case.contains(p.year)).map(|p| p.id).collect();
    if ids.is_empty() {
        return Err(CorpusError::EmptyWindow { start: case.window.0, end: case.window.1 });
    }
    ids.shuffle(&mut seed::rng(seed));
    let n_test = test_size(ids.len());
    let test_ids = ids.split_off(ids.len() - n_test);
    Ok(SplitSpec { case, train_ids: ids, test_ids })
}
