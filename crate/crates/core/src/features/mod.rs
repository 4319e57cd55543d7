//! Per-paper feature families (article, author, venue, network) evaluated
//! on a frozen snapshot, and assembly into the normalized matrix `X`.

mod article;
mod bibliometric;
mod matrix;

pub use article::{citation_quality, paper_diversity, paper_popularity, topic_popularity, TopicPopularity};
pub use bibliometric::{
    author_features, author_stats, distinct_authors, h_index, venue_features, venue_features_by_name, venue_type,
    AuthorFeatures, AuthorStats, BibliometricIndex, VenueFeatures, VenueRanks, VenueType, AUTHOR_COLUMNS,
    VENUE_COLUMNS,
};
pub use matrix::{
    apply_norm_stats, assemble, leaking_columns, normalize, pearson, ColumnSpec, FeatureBlock, FeatureMatrix,
    NormStats, GUARD_BOUNDS,
};

use crate::corpus::{CorpusSnapshot, PaperId};
use crate::graph::CitationGraph;
use crate::topics::DocTopics;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("unknown paper id {0}")]
    UnknownPaper(PaperId),
    #[error("no topic distribution for paper {0}")]
    MissingTopics(PaperId),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("block {block:?} has no complete row for paper {paper}")]
    CoverageGap { paper: PaperId, block: String },
    #[error("non-finite value in column {column:?} for paper {paper}")]
    NonFinite { paper: PaperId, column: String },
    #[error("normalization needs at least one training row")]
    EmptyTrainRows,
    #[error("normalization statistics do not match the matrix columns")]
    ColumnMismatch,
    #[error("venue rank sidecar: {0}")]
    Sidecar(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for FeatureError {
    fn from(e: csv::Error) -> Self {
        FeatureError::Csv(e.to_string())
    }
}

pub const ARTICLE_COLUMNS: [&str; 3] = ["citation_quality", "popularity", "diversity"];
pub const NETWORK_COLUMNS: [&str; 2] = ["times_cited", "reference_count"];

/// Column order of a fully assembled matrix.
pub fn feature_columns() -> Vec<String> {
    let mut cols: Vec<String> = ARTICLE_COLUMNS.iter().chain(&AUTHOR_COLUMNS).map(|s| s.to_string()).collect();
    for c in VENUE_COLUMNS {
        cols.push(c.to_string());
        if c == "venue_rank" {
            cols.push("venue_rank_missing".to_string());
        }
    }
    cols.extend(NETWORK_COLUMNS.iter().map(|s| s.to_string()));
    cols
}

/// `(times_cited, reference_count)` for node `i`: edges into and out of it.
pub fn network_features(graph: &CitationGraph, i: usize) -> (usize, usize) {
    (graph.in_degree[i], graph.out_degree[i])
}

/// Everything needed to evaluate all feature families for the graph's
/// nodes at one snapshot.
pub struct FeatureContext<'a> {
    pub snapshot: &'a CorpusSnapshot,
    pub graph: &'a CitationGraph,
    pub doc_topics: &'a DocTopics,
    pub topic_popularity: &'a TopicPopularity,
    pub venue_ranks: Option<&'a VenueRanks>,
}

impl FeatureContext<'_> {
    pub fn article_block(&self) -> Result<FeatureBlock, FeatureError> {
        let mut block = FeatureBlock::new(ARTICLE_COLUMNS.iter().map(|c| ColumnSpec::required(c)).collect());
        for &id in &self.graph.node_ids {
            let dist = self.doc_topics.get(id).ok_or(FeatureError::MissingTopics(id))?;
            block.insert(
                id,
                vec![
                    citation_quality(self.snapshot, id)?,
                    paper_popularity(dist, self.topic_popularity),
                    paper_diversity(dist),
                ],
            );
        }
        Ok(block)
    }

    pub fn bibliometric_blocks(&self) -> Result<(FeatureBlock, FeatureBlock), FeatureError> {
        let index = BibliometricIndex::new(self.snapshot, self.venue_ranks);
        let mut authors = FeatureBlock::new(AUTHOR_COLUMNS.iter().map(|c| ColumnSpec::required(c)).collect());
        let mut venues = FeatureBlock::new(
            VENUE_COLUMNS
                .iter()
                .map(|c| if *c == "venue_rank" { ColumnSpec::nullable(c) } else { ColumnSpec::required(c) })
                .collect(),
        );
        for &id in &self.graph.node_ids {
            let paper = self.snapshot.get(id).ok_or(FeatureError::UnknownPaper(id))?;
            authors.insert(id, index.author_features(&paper.authors).to_vec());
            let venue = index
                .venue_features(&paper.venue)
                .copied()
                .unwrap_or_else(|| venue_features_by_name(self.snapshot, &paper.venue, self.venue_ranks));
            venues.rows.insert(id, venue.to_row());
        }
        Ok((authors, venues))
    }

    pub fn network_block(&self) -> FeatureBlock {
        let mut block = FeatureBlock::new(NETWORK_COLUMNS.iter().map(|c| ColumnSpec::required(c)).collect());
        for (i, &id) in self.graph.node_ids.iter().enumerate() {
            let (cited, refs) = network_features(self.graph, i);
            block.insert(id, vec![cited as f64, refs as f64]);
        }
        block
    }

    /// Unnormalized matrix over the graph's nodes, columns in
    /// [`feature_columns`] order.
    pub fn feature_matrix(&self) -> Result<FeatureMatrix, FeatureError> {
        let (authors, venues) = self.bibliometric_blocks()?;
        let blocks = [self.article_block()?, authors, venues, self.network_block()];
        assemble(&self.graph.node_ids, &blocks)
    }
}
