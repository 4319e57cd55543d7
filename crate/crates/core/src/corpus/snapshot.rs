use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::record::{PaperId, PaperRecord};
use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Authorship {
    pub paper: PaperId,
    pub year: i32,
    /// 0-based position in the paper's author list.
    pub position: usize,
}

/// Cleaned corpus frozen at `cutoff_year`.
///
/// Every index only sees papers with `year <= cutoff_year`. References to
/// papers outside the snapshot stay on the records but create no citer
/// entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSnapshot {
    pub cutoff_year: i32,
    pub papers: BTreeMap<PaperId, PaperRecord>,
    pub citers: BTreeMap<PaperId, BTreeSet<PaperId>>,
    pub author_index: BTreeMap<String, Vec<Authorship>>,
    pub venue_index: BTreeMap<String, Vec<PaperId>>,
}

impl CorpusSnapshot {
    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn get(&self, id: PaperId) -> Option<&PaperRecord> {
        self.papers.get(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = PaperId> + '_ {
        self.papers.keys().copied()
    }

    /// Citations received up to the cutoff; 0 for ids outside the snapshot.
    pub fn cited_by_count(&self, id: PaperId) -> usize {
        self.citers.get(&id).map_or(0, BTreeSet::len)
    }

    /// Number of citing papers whose publication year lies in
    /// `[from_year, to_year]`.
    pub fn citation_count(&self, id: PaperId, from_year: i32, to_year: i32) -> Result<usize, CorpusError> {
        let citers = self.citers.get(&id).ok_or(CorpusError::UnknownPaper(id))?;
        if from_year > to_year || to_year > self.cutoff_year {
            return Err(CorpusError::InvalidWindow { from_year, to_year, cutoff_year: self.cutoff_year });
        }
        Ok(citers
            .iter()
            .filter(|c| {
                let y = self.papers[c].year;
                from_year <= y && y <= to_year
            })
            .count())
    }

    pub fn min_year(&self) -> Option<i32> {
        self.papers.values().map(|p| p.year).min()
    }
}

/// Freezes `records` at `cutoff_year`. Records are expected to be cleaned.
pub fn build_snapshot(records: &[PaperRecord], cutoff_year: i32) -> CorpusSnapshot {
    let papers: BTreeMap<PaperId, PaperRecord> =
        records.iter().filter(|r| r.year <= cutoff_year).map(|r| (r.id, r.clone())).collect();

    let mut citers: BTreeMap<PaperId, BTreeSet<PaperId>> = papers.keys().map(|id| (*id, BTreeSet::new())).collect();
    let mut author_index: BTreeMap<String, Vec<Authorship>> = BTreeMap::new();
    let mut venue_index: BTreeMap<String, Vec<PaperId>> = BTreeMap::new();
    for (id, paper) in &papers {
        for r in &paper.references {
            if let Some(set) = citers.get_mut(r) {
                set.insert(*id);
            }
        }
        for (position, name) in paper.authors.iter().enumerate() {
            let entries = author_index.entry(name.clone()).or_default();
            // A name repeated within one author list is recorded once.
            if entries.last().is_some_and(|a| a.paper == *id) {
                continue;
            }
            entries.push(Authorship { paper: *id, year: paper.year, position });
        }
        venue_index.entry(paper.venue.clone()).or_default().push(*id);
    }

    CorpusSnapshot { cutoff_year, papers, citers, author_index, venue_index }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<PaperRecord> {
        vec![
            PaperRecord::new(1, 2005).with_authors(["X"]).with_venue("V").with_references([2u64]),
            PaperRecord::new(2, 2004).with_authors(["X", "Y"]).with_venue("V"),
        ]
    }

    #[test]
    fn single_edge_inversion() {
        let snap = build_snapshot(&corpus(), 2005);
        assert_eq!(snap.citers[&PaperId(2)], BTreeSet::from([PaperId(1)]));
        assert!(snap.citers[&PaperId(1)].is_empty());
    }

    #[test]
    fn cutoff_excludes_the_citer() {
        let snap = build_snapshot(&corpus(), 2004);
        assert_eq!(snap.len(), 1);
        assert!(snap.citers[&PaperId(2)].is_empty());
    }

    #[test]
    fn dangling_references_stay_on_record() {
        let records = vec![PaperRecord::new(1, 2000).with_authors(["A"]).with_venue("V").with_references([99u64])];
        let snap = build_snapshot(&records, 2000);
        assert_eq!(snap.papers[&PaperId(1)].references, vec![PaperId(99)]);
        assert!(!snap.citers.contains_key(&PaperId(99)));
    }

    #[test]
    fn citation_count_windows() {
        let records = vec![
            PaperRecord::new(1, 2006).with_authors(["A"]).with_venue("V"),
            PaperRecord::new(2, 2007).with_authors(["A"]).with_venue("V").with_references([1u64]),
            PaperRecord::new(3, 2008).with_authors(["A"]).with_venue("V").with_references([1u64]),
            PaperRecord::new(4, 2012).with_authors(["A"]).with_venue("V").with_references([1u64]),
            PaperRecord::new(5, 2012).with_authors(["A"]).with_venue("V"),
        ];
        let snap = build_snapshot(&records, 2012);
        assert_eq!(snap.citation_count(PaperId(1), 2006, 2011).unwrap(), 2);
        assert_eq!(snap.citation_count(PaperId(1), 2008, 2008).unwrap(), 1);
        assert_eq!(snap.citation_count(PaperId(5), 2000, 2012).unwrap(), 0);
        assert!(matches!(snap.citation_count(PaperId(77), 2000, 2012), Err(CorpusError::UnknownPaper(_))));
        assert!(matches!(snap.citation_count(PaperId(1), 2000, 2013), Err(CorpusError::InvalidWindow { .. })));
    }

    #[test]
    fn indexes() {
        let snap = build_snapshot(&corpus(), 2005);
        assert_eq!(snap.author_index["X"].len(), 2);
        assert_eq!(snap.author_index["Y"][0].position, 1);
        assert_eq!(snap.venue_index["V"], vec![PaperId(1), PaperId(2)]);
    }
}
