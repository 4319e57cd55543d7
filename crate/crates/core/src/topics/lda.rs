use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TopicError;
use crate::corpus::PaperId;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Symmetric document-topic prior; `None` means `50 / num_topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub inference_sweeps: usize,
    /// Tokens seen in fewer documents are dropped from the vocabulary.
    pub min_doc_freq: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            num_topics: 50,
            alpha: None,
            beta: 0.01,
            iterations: 200,
            inference_sweeps: 20,
            min_doc_freq: 2,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.num_topics as f64)
    }
}

/// Fitted topic-word distributions. Rows of `topic_word` are simplexes over
/// the vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub num_topics: usize,
    pub vocabulary: BTreeMap<String, usize>,
    pub topic_word: Vec<Vec<f64>>,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub inference_sweeps: usize,
}

impl TopicModel {
    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.vocabulary.get(t).copied()).collect()
    }

    /// Most probable words per topic, for inspection.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<&str> {
        let words: Vec<&str> = {
            let mut w = vec![""; self.vocab_size()];
            for (token, &col) in &self.vocabulary {
                w[col] = token.as_str();
            }
            w
        };
        let mut cols: Vec<usize> = (0..self.vocab_size()).collect();
        let row = &self.topic_word[topic];
        cols.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        cols.into_iter().take(n).map(|c| words[c]).collect()
    }
}

fn build_vocabulary(docs: &[Vec<String>], min_doc_freq: usize) -> BTreeMap<String, usize> {
    let mut doc_freq: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let mut distinct: Vec<&str> = doc.iter().map(String::as_str).collect();
        distinct.sort_unstable();
        distinct.dedup();
        for t in distinct {
            *doc_freq.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<&str> = doc_freq.into_iter().filter(|(_, df)| *df >= min_doc_freq).map(|(t, _)| t).collect();
    kept.sort_unstable();
    kept.into_iter().enumerate().map(|(i, t)| (t.to_string(), i)).collect()
}

fn sample_categorical(weights: &[f64], total: f64, rng: &mut impl Rng) -> usize {
    let mut u = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return k;
        }
    }
    weights.len() - 1
}

/// Collapsed Gibbs sampling over `docs` for `config.iterations` sweeps.
pub fn fit_lda(docs: &[Vec<String>], config: &LdaConfig) -> Result<TopicModel, TopicError> {
    let k = config.num_topics;
    if k < 2 {
        return Err(TopicError::InvalidConfig(format!("num_topics must be >= 2, got {k}")));
    }
    if config.iterations == 0 {
        return Err(TopicError::InvalidConfig("iterations must be >= 1".into()));
    }
    let alpha = config.alpha();
    if !(alpha > 0.0 && config.beta > 0.0) {
        return Err(TopicError::InvalidConfig("alpha and beta must be positive".into()));
    }

    let vocabulary = build_vocabulary(docs, config.min_doc_freq.max(1));
    let v = vocabulary.len();
    let words: Vec<Vec<usize>> =
        docs.iter().map(|d| d.iter().filter_map(|t| vocabulary.get(t).copied()).collect()).collect();
    if v == 0 || words.iter().all(Vec::is_empty) {
        return Err(TopicError::EmptyCorpus);
    }

    let mut rng = seed::rng(config.seed);
    let mut doc_topic = vec![vec![0u32; k]; words.len()];
    let mut topic_word = vec![vec![0u32; v]; k];
    let mut topic_total = vec![0u32; k];
    let mut assignment: Vec<Vec<usize>> = Vec::with_capacity(words.len());
    for (d, doc) in words.iter().enumerate() {
        let z: Vec<usize> = doc.iter().map(|_| rng.random_range(0..k)).collect();
        for (&w, &t) in doc.iter().zip(&z) {
            doc_topic[d][t] += 1;
            topic_word[t][w] += 1;
            topic_total[t] += 1;
        }
        assignment.push(z);
    }

    let v_beta = v as f64 * config.beta;
    let mut weights = vec![0.0; k];
    for _ in 0..config.iterations {
        for (d, doc) in words.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = assignment[d][i];
                doc_topic[d][old] -= 1;
                topic_word[old][w] -= 1;
                topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (doc_topic[d][t] as f64 + alpha) * (topic_word[t][w] as f64 + config.beta)
                        / (topic_total[t] as f64 + v_beta);
                    weights[t] = p;
                    total += p;
                }
                let new = sample_categorical(&weights, total, &mut rng);

                assignment[d][i] = new;
                doc_topic[d][new] += 1;
                topic_word[new][w] += 1;
                topic_total[new] += 1;
            }
        }
    }

    let topic_word = topic_word
        .iter()
        .zip(&topic_total)
        .map(|(row, &total)| {
            let denom = total as f64 + v_beta;
            row.iter().map(|&c| (c as f64 + config.beta) / denom).collect()
        })
        .collect();

    Ok(TopicModel {
        num_topics: k,
        vocabulary,
        topic_word,
        alpha,
        beta: config.beta,
        seed: config.seed,
        inference_sweeps: config.inference_sweeps,
    })
}

/// Gibbs inference of one document's topic proportions against the frozen
/// topic-word matrix. `stream` selects the random stream, so results do not
/// depend on the order documents are processed in.
pub fn infer_proportions(model: &TopicModel, tokens: &[String], stream: u64) -> Vec<f64> {
    let k = model.num_topics;
    let words = model.encode(tokens);
    if words.is_empty() {
        return vec![1.0 / k as f64; k];
    }
    let mut rng = seed::stream_rng(model.seed, stream);
    let mut counts = vec![0u32; k];
    let mut weights = vec![0.0; k];
    let mut z = Vec::with_capacity(words.len());
    for &w in &words {
        let mut total = 0.0;
        for t in 0..k {
            weights[t] = model.topic_word[t][w];
            total += weights[t];
        }
        let t = sample_categorical(&weights, total, &mut rng);
        counts[t] += 1;
        z.push(t);
    }
    for _ in 0..model.inference_sweeps {
        for (i, &w) in words.iter().enumerate() {
            counts[z[i]] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                weights[t] = (counts[t] as f64 + model.alpha) * model.topic_word[t][w];
                total += weights[t];
            }
            let t = sample_categorical(&weights, total, &mut rng);
            counts[t] += 1;
            z[i] = t;
        }
    }
    let denom = words.len() as f64 + k as f64 * model.alpha;
    counts.iter().map(|&c| (c as f64 + model.alpha) / denom).collect()
}

/// Per-paper topic distributions `p(z|d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTopics {
    pub num_topics: usize,
    pub dists: BTreeMap<PaperId, Vec<f64>>,
}

impl DocTopics {
    pub fn get(&self, id: PaperId) -> Option<&[f64]> {
        self.dists.get(&id).map(Vec::as_slice)
    }

    /// CSV with header `paper_id,p_0,...,p_{K-1}`.
    pub fn write_csv(&self, out: impl Write) -> Result<(), TopicError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["paper_id".to_string()];
        header.extend((0..self.num_topics).map(|k| format!("p_{k}")));
        w.write_record(&header)?;
        for (id, dist) in &self.dists {
            let mut row = vec![id.to_string()];
            row.extend(dist.iter().map(|p| format!("{p:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Infers `p(z|d)` for every document. Runs in parallel; each document uses
/// the random stream keyed by its paper id.
pub fn infer_doc_topics(model: &TopicModel, docs: &[(PaperId, Vec<String>)]) -> DocTopics {
    let dists: Vec<(PaperId, Vec<f64>)> =
        docs.par_iter().map(|(id, tokens)| (*id, infer_proportions(model, tokens, id.0))).collect();
    DocTopics { num_topics: model.num_topics, dists: dists.into_iter().collect() }
}
