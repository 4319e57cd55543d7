//! Latent Dirichlet allocation over titles and abstracts, supplying the
//! per-document topic distributions used by the popularity and diversity
//! features.

mod lda;
mod tokenize;

use std::path::Path;

pub use lda::{fit_lda, infer_doc_topics, infer_proportions, DocTopics, LdaConfig, TopicModel};
pub use tokenize::{is_stopword, tokenize, tokenize_text};

use crate::persist::{self, PersistError, TOPIC_MODEL_FORMAT};

#[derive(Debug, thiserror::Error)]
pub enum TopicError {
    #[error("invalid LDA configuration: {0}")]
    InvalidConfig(String),
    #[error("corpus has no tokens left after vocabulary pruning")]
    EmptyCorpus,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Persist(#[from] PersistError),
}

impl TopicModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TopicError> {
        Ok(persist::save(TOPIC_MODEL_FORMAT, self, path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TopicError> {
        Ok(persist::load(TOPIC_MODEL_FORMAT, path)?)
    }
}
