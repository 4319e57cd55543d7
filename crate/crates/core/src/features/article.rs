use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::corpus::{CorpusSnapshot, PaperId};
use crate::topics::DocTopics;

/// Mean citation count (at the snapshot cutoff) of a paper's references.
/// References outside the snapshot count as uncited; no references gives 0.
pub fn citation_quality(snapshot: &CorpusSnapshot, id: PaperId) -> Result<f64, FeatureError> {
    let paper = snapshot.get(id).ok_or(FeatureError::UnknownPaper(id))?;
    if paper.references.is_empty() {
        return Ok(0.0);
    }
    let total: usize = paper.references.iter().map(|r| snapshot.cited_by_count(*r)).sum();
    Ok(total as f64 / paper.references.len() as f64)
}

/// Citation-weighted topic mass averaged over a corpus:
/// `popularity(z) = (1/|D|) Σ_d p(z|d) C_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicPopularity(pub Vec<f64>);

pub fn topic_popularity(
    doc_topics: &DocTopics,
    citations: impl Fn(PaperId) -> f64,
    corpus_ids: &[PaperId],
) -> Result<TopicPopularity, FeatureError> {
    if corpus_ids.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let mut pop = vec![0.0; doc_topics.num_topics];
    for &id in corpus_ids {
        let dist = doc_topics.get(id).ok_or(FeatureError::MissingTopics(id))?;
        let c = citations(id);
        for (acc, p) in pop.iter_mut().zip(dist) {
            *acc += p * c;
        }
    }
    let n = corpus_ids.len() as f64;
    pop.iter_mut().for_each(|p| *p /= n);
    Ok(TopicPopularity(pop))
}

/// `(1/|Z|) Σ_z popularity(z) p(z|d)`.
pub fn paper_popularity(dist: &[f64], topic_popularity: &TopicPopularity) -> f64 {
    let k = dist.len() as f64;
    dist.iter().zip(&topic_popularity.0).map(|(p, pop)| p * pop).sum::<f64>() / k
}

/// Per-topic averaged Shannon entropy in nats, `(1/|Z|) Σ_z -p ln p`, with
/// `0 ln 0 = 0`.
pub fn paper_diversity(dist: &[f64]) -> f64 {
    let k = dist.len() as f64;
    dist.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum::<f64>() / k
}
