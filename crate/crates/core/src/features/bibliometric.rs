//! Author and venue statistics: h-index, citation totals, productivity.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::corpus::{CorpusSnapshot, PaperId};

/// Largest `h` such that at least `h` of the counts are `>= h`.
pub fn h_index(counts: &[usize]) -> usize {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted.iter().enumerate().take_while(|(i, c)| **c > *i).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AuthorStats {
    pub papers: usize,
    pub citations: usize,
    pub h_index: usize,
}

pub fn author_stats(snapshot: &CorpusSnapshot, name: &str) -> AuthorStats {
    let Some(entries) = snapshot.author_index.get(name) else {
        return AuthorStats::default();
    };
    let counts: Vec<usize> = entries.iter().map(|a| snapshot.cited_by_count(a.paper)).collect();
    AuthorStats { papers: counts.len(), citations: counts.iter().sum(), h_index: h_index(&counts) }
}

pub const AUTHOR_COLUMNS: [&str; 11] = [
    "first_author_papers",
    "highest_h_index",
    "total_h_index",
    "average_h_index",
    "first_author_h_index",
    "average_citations",
    "first_author_citations",
    "highest_citations",
    "average_papers_per_author",
    "papers_by_highest_h_author",
    "num_coauthors",
];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AuthorFeatures {
    pub first_author_papers: f64,
    pub highest_h_index: f64,
    pub total_h_index: f64,
    pub average_h_index: f64,
    pub first_author_h_index: f64,
    pub average_citations: f64,
    pub first_author_citations: f64,
    pub highest_citations: f64,
    pub average_papers_per_author: f64,
    pub papers_by_highest_h_author: f64,
    pub num_coauthors: f64,
}

impl AuthorFeatures {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.first_author_papers,
            self.highest_h_index,
            self.total_h_index,
            self.average_h_index,
            self.first_author_h_index,
            self.average_citations,
            self.first_author_citations,
            self.highest_citations,
            self.average_papers_per_author,
            self.papers_by_highest_h_author,
            self.num_coauthors,
        ]
    }

    /// Aggregates per-author statistics given in author order (duplicates
    /// already removed).
    pub fn from_stats(stats: &[AuthorStats]) -> AuthorFeatures {
        let Some(first) = stats.first() else {
            return AuthorFeatures::default();
        };
        let n = stats.len() as f64;
        let mut top = first;
        for s in &stats[1..] {
            if s.h_index > top.h_index {
                top = s;
            }
        }
        AuthorFeatures {
            first_author_papers: first.papers as f64,
            highest_h_index: top.h_index as f64,
            total_h_index: stats.iter().map(|s| s.h_index).sum::<usize>() as f64,
            average_h_index: stats.iter().map(|s| s.h_index).sum::<usize>() as f64 / n,
            first_author_h_index: first.h_index as f64,
            average_citations: stats.iter().map(|s| s.citations).sum::<usize>() as f64 / n,
            first_author_citations: first.citations as f64,
            highest_citations: stats.iter().map(|s| s.citations).max().unwrap_or(0) as f64,
            average_papers_per_author: stats.iter().map(|s| s.papers).sum::<usize>() as f64 / n,
            papers_by_highest_h_author: top.papers as f64,
            num_coauthors: n - 1.0,
        }
    }
}

/// Author names in order with repeats removed.
pub fn distinct_authors(authors: &[String]) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::with_capacity(authors.len());
    for a in authors {
        if !out.contains(&a.as_str()) {
            out.push(a);
        }
    }
    out
}

pub fn author_features(snapshot: &CorpusSnapshot, id: PaperId) -> Result<AuthorFeatures, FeatureError> {
    let paper = snapshot.get(id).ok_or(FeatureError::UnknownPaper(id))?;
    let stats: Vec<AuthorStats> = distinct_authors(&paper.authors).iter().map(|a| author_stats(snapshot, a)).collect();
    Ok(AuthorFeatures::from_stats(&stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VenueType {
    Journal,
    Conference,
    Unknown,
}

/// Keyword heuristic on the venue name.
pub fn venue_type(name: &str) -> VenueType {
    let lower = name.to_lowercase();
    if ["journal", "trans.", "transactions"].iter().any(|k| lower.contains(k)) {
        VenueType::Journal
    } else if ["proc", "conf", "symp", "workshop"].iter().any(|k| lower.contains(k)) {
        VenueType::Conference
    } else {
        VenueType::Unknown
    }
}

/// Venue name to rank, read from a `venue,rank` CSV sidecar.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VenueRanks(pub BTreeMap<String, f64>);

impl VenueRanks {
    pub fn from_csv(input: impl Read) -> Result<Self, FeatureError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
        let mut ranks = BTreeMap::new();
        for row in reader.records() {
            let row = row?;
            let (Some(venue), Some(rank)) = (row.get(0), row.get(1)) else {
                return Err(FeatureError::Sidecar(format!("expected venue,rank in {row:?}")));
            };
            let rank: f64 = rank.parse().map_err(|_| FeatureError::Sidecar(format!("bad rank {rank:?}")))?;
            ranks.insert(venue.to_string(), rank);
        }
        Ok(VenueRanks(ranks))
    }
}

pub const VENUE_COLUMNS: [&str; 6] = [
    "venue_avg_citations",
    "venue_h_index",
    "venue_paper_count",
    "venue_is_journal",
    "venue_is_conference",
    "venue_rank",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VenueFeatures {
    pub avg_citations: f64,
    pub h_index: f64,
    pub paper_count: f64,
    pub venue_type: VenueType,
    pub rank: Option<f64>,
}

impl VenueFeatures {
    pub fn to_row(&self) -> Vec<Option<f64>> {
        vec![
            Some(self.avg_citations),
            Some(self.h_index),
            Some(self.paper_count),
            Some(f64::from(u8::from(self.venue_type == VenueType::Journal))),
            Some(f64::from(u8::from(self.venue_type == VenueType::Conference))),
            self.rank,
        ]
    }
}

pub fn venue_features_by_name(snapshot: &CorpusSnapshot, venue: &str, ranks: Option<&VenueRanks>) -> VenueFeatures {
    let counts: Vec<usize> = snapshot
        .venue_index
        .get(venue)
        .map(|ids| ids.iter().map(|p| snapshot.cited_by_count(*p)).collect())
        .unwrap_or_default();
    let avg = if counts.is_empty() { 0.0 } else { counts.iter().sum::<usize>() as f64 / counts.len() as f64 };
    VenueFeatures {
        avg_citations: avg,
        h_index: h_index(&counts) as f64,
        paper_count: counts.len() as f64,
        venue_type: venue_type(venue),
        rank: ranks.and_then(|r| r.0.get(venue).copied()),
    }
}

pub fn venue_features(
    snapshot: &CorpusSnapshot,
    id: PaperId,
    ranks: Option<&VenueRanks>,
) -> Result<VenueFeatures, FeatureError> {
    let paper = snapshot.get(id).ok_or(FeatureError::UnknownPaper(id))?;
    Ok(venue_features_by_name(snapshot, &paper.venue, ranks))
}

/// Memoized author and venue statistics for bulk feature computation.
#[derive(Debug, Default)]
pub struct BibliometricIndex {
    authors: HashMap<String, AuthorStats>,
    venues: HashMap<String, VenueFeatures>,
}

impl BibliometricIndex {
    pub fn new(snapshot: &CorpusSnapshot, ranks: Option<&VenueRanks>) -> Self {
        let authors = snapshot.author_index.keys().map(|a| (a.clone(), author_stats(snapshot, a))).collect();
        let venues =
            snapshot.venue_index.keys().map(|v| (v.clone(), venue_features_by_name(snapshot, v, ranks))).collect();
        BibliometricIndex { authors, venues }
    }

    pub fn author_features(&self, authors: &[String]) -> AuthorFeatures {
        let stats: Vec<AuthorStats> =
            distinct_authors(authors).iter().map(|a| self.authors.get(*a).copied().unwrap_or_default()).collect();
        AuthorFeatures::from_stats(&stats)
    }

    pub fn venue_features(&self, venue: &str) -> Option<&VenueFeatures> {
        self.venues.get(venue)
    }
}
