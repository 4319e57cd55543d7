use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::record::PaperRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanConfig {
    /// An author with more than this many records in one calendar year is
    /// treated as anomalous; all of their records in that year are dropped.
    pub productivity_cap: usize,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig { productivity_cap: 1000 }
    }
}

/// Per-reason counts. A record lacking both authors and venue is counted
/// under `missing_author` only.
///
/// An empty affiliation list already means "all missing"; partial lists are
/// padded with the `None` marker so they stay aligned with the authors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub input: usize,
    pub kept: usize,
    pub missing_author: usize,
    pub missing_venue: usize,
    pub anomalous_productivity: usize,
    pub affiliations_filled: usize,
    pub references_repaired: usize,
}

impl CleanReport {
    pub fn dropped(&self) -> usize {
        self.missing_author + self.missing_venue + self.anomalous_productivity
    }
}

pub fn clean(records: Vec<PaperRecord>, config: &CleanConfig) -> (Vec<PaperRecord>, CleanReport) {
    let mut report = CleanReport { input: records.len(), ..Default::default() };

    let mut survivors = Vec::with_capacity(records.len());
    for mut r in records {
        r.authors.retain(|a| !a.trim().is_empty());
        if r.authors.is_empty() {
            report.missing_author += 1;
            continue;
        }
        if r.venue.trim().is_empty() {
            report.missing_venue += 1;
            continue;
        }
        if !r.affiliations.is_empty() && r.affiliations.len() != r.authors.len() {
            let before_missing = r.affiliations.iter().filter(|a| a.is_none()).count();
            r.affiliations.resize(r.authors.len(), None);
            let after_missing = r.affiliations.iter().filter(|a| a.is_none()).count();
            report.affiliations_filled += after_missing.saturating_sub(before_missing);
        }
        let (dups, selfs) = r.normalize_references();
        if dups + selfs > 0 {
            report.references_repaired += 1;
        }
        survivors.push(r);
    }

    let mut per_author_year: HashMap<(&str, i32), usize> = HashMap::new();
    for r in &survivors {
        let mut distinct: Vec<&str> = r.authors.iter().map(String::as_str).collect();
        distinct.sort_unstable();
        distinct.dedup();
        for a in distinct {
            *per_author_year.entry((a, r.year)).or_default() += 1;
        }
    }
    let anomalous: std::collections::HashSet<(String, i32)> = per_author_year
        .into_iter()
        .filter(|(_, n)| *n > config.productivity_cap)
        .map(|((a, y), _)| (a.to_string(), y))
        .collect();

    let kept: Vec<PaperRecord> = if anomalous.is_empty() {
        survivors
    } else {
        survivors
            .into_iter()
            .filter(|r| {
                let bad = r.authors.iter().any(|a| anomalous.contains(&(a.clone(), r.year)));
                if bad {
                    report.anomalous_productivity += 1;
                }
                !bad
            })
            .collect()
    };
    report.kept = kept.len();
    (kept, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PaperId;

    fn rec(id: u64) -> PaperRecord {
        PaperRecord::new(id, 2000).with_authors(["A"]).with_venue("V")
    }

    #[test]
    fn missing_venue_is_dropped() {
        let (kept, report) = clean(vec![rec(1).with_venue("")], &CleanConfig::default());
        assert!(kept.is_empty());
        assert_eq!(report.missing_venue, 1);
    }

    #[test]
    fn missing_author_is_dropped() {
        let r = PaperRecord::new(1, 2000).with_venue("V").with_authors([" "]);
        let (kept, report) = clean(vec![r], &CleanConfig::default());
        assert!(kept.is_empty());
        assert_eq!(report.missing_author, 1);
    }

    #[test]
    fn papers_without_references_are_kept_unchanged() {
        let r = rec(1);
        let (kept, report) = clean(vec![r.clone()], &CleanConfig::default());
        assert_eq!(kept, vec![r]);
        assert_eq!(report.dropped(), 0);
    }

    #[test]
    fn productivity_cap_drops_whole_author_year() {
        let mut records: Vec<PaperRecord> =
            (0..1001).map(|i| PaperRecord::new(i, 2005).with_authors(["Prolific"]).with_venue("V")).collect();
        records.push(PaperRecord::new(5000, 2006).with_authors(["Prolific"]).with_venue("V"));
        records.push(PaperRecord::new(5001, 2005).with_authors(["Other"]).with_venue("V"));
        let (kept, report) = clean(records, &CleanConfig::default());
        assert_eq!(report.anomalous_productivity, 1001);
        let ids: Vec<u64> = kept.iter().map(|r| r.id.0).collect();
        assert_eq!(ids, vec![5000, 5001]);
    }

    #[test]
    fn missing_affiliations_are_filled_with_marker() {
        let mut r = rec(1).with_authors(["A", "B"]);
        r.affiliations = vec![Some("U".into())];
        let (kept, report) = clean(vec![r], &CleanConfig::default());
        assert_eq!(kept[0].affiliations, vec![Some("U".into()), None]);
        assert_eq!(report.affiliations_filled, 1);
    }

    #[test]
    fn repairs_references_from_unchecked_sources() {
        let r = rec(1).with_references([2u64, 2, 1, 3]);
        let (kept, report) = clean(vec![r], &CleanConfig::default());
        assert_eq!(kept[0].references, vec![PaperId(2), PaperId(3)]);
        assert_eq!(report.references_repaired, 1);
    }
}
