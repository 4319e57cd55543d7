//! Synthetic bibliographic corpora with known citation dynamics.
//!
//! Papers arrive year by year. Each picks a topic, one to five authors, a
//! venue, pseudo-word text from its topic's vocabulary, and references to
//! strictly earlier papers drawn with weight
//!
//! ```text
//! (1 + strength * in_degree) * affinity^[same topic] * topic_weight
//! ```
//!
//! Citations received after `last_year` are recorded as ground truth.

use std::io::Write;

use ndarray::Array2;
use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{build_snapshot, PaperId, PaperRecord};
use crate::graph::{build_citation_graph, normalized_adjacency, spmm, GraphError};
use crate::seed;

const SYLLABLES: [&str; 16] =
    ["ka", "lo", "mi", "nu", "re", "sa", "tor", "vi", "zen", "pha", "dru", "qel", "bim", "gor", "wex", "yul"];

/// How citations after the observed span are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FutureMode {
    /// Keep running the attachment process for `future_years`.
    Organic,
    /// Papers of `last_year` receive `(1 + max_rate)^z - 1` future
    /// citations (times log-normal noise), where `z` is their reference
    /// count smoothed `hops` times over the normalized citation graph and
    /// scaled to `[0, 1]`. Citations come from papers dated `last_year + 1`.
    Planted { max_rate: f64, hops: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub num_papers: usize,
    pub num_authors: usize,
    pub num_venues: usize,
    pub num_topics: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub future_years: i32,
    /// Yearly multiplicative growth in output.
    pub growth: f64,
    /// References per paper are uniform on `0..=2*mean_references`.
    pub mean_references: usize,
    pub attachment_strength: f64,
    /// Weight multiplier for same-topic references.
    pub topic_affinity: f64,
    /// Topic popularity; also the topic-choice distribution. Defaults to
    /// `1, 1/2, 1/3, ...`.
    pub topic_weights: Option<Vec<f64>>,
    pub words_per_topic: usize,
    pub abstract_words: usize,
    /// Log-normal sigma for planted counts.
    pub noise: f64,
    pub future: FutureMode,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_papers: 2000,
            num_authors: 400,
            num_venues: 12,
            num_topics: 5,
            first_year: 2001,
            last_year: 2010,
            future_years: 1,
            growth: 1.15,
            mean_references: 6,
            attachment_strength: 1.0,
            topic_affinity: 4.0,
            topic_weights: None,
            words_per_topic: 40,
            abstract_words: 40,
            noise: 0.1,
            future: FutureMode::Organic,
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic corpus configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.num_papers == 0
            || self.num_authors == 0
            || self.num_venues == 0
            || self.num_topics == 0
            || self.words_per_topic == 0
        {
            return bad("paper, author, venue, topic and vocabulary counts must be at least 1".into());
        }
        if self.last_year < self.first_year || self.future_years < 0 {
            return bad("years must satisfy first_year <= last_year and future_years >= 0".into());
        }
        if !(self.growth > 0.0)
            || !(self.attachment_strength >= 0.0)
            || !(self.topic_affinity > 0.0)
            || !(self.noise >= 0.0)
        {
            return bad("growth and affinity must be positive; strength and noise non-negative".into());
        }
        if let Some(w) = &self.topic_weights {
            if w.len() != self.num_topics || w.iter().any(|v| !(*v > 0.0)) {
                return bad(format!("topic_weights needs {} positive entries", self.num_topics));
            }
        }
        if let FutureMode::Planted { max_rate, .. } = self.future {
            if !(max_rate >= 0.0) {
                return bad("planted max_rate must be non-negative".into());
            }
            if self.future_years < 1 {
                return bad("planted future needs future_years >= 1".into());
            }
        }
        let words = (self.num_topics + 1) * self.words_per_topic;
        if words > SYLLABLES.len().pow(3) {
            return bad(format!("vocabulary of {words} words exceeds the pseudo-word space"));
        }
        Ok(())
    }

    fn weights(&self) -> Vec<f64> {
        self.topic_weights.clone().unwrap_or_else(|| (1..=self.num_topics).map(|k| 1.0 / k as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub paper_id: PaperId,
    pub year: i32,
    pub topic: usize,
    /// Expected planted count before noise; 0 outside planted mode.
    pub planted_rate: f64,
    /// Citations received from papers dated after `last_year`.
    pub future_citations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    /// Observed span followed by future papers, in id order.
    pub records: Vec<PaperRecord>,
    /// One row per paper dated `first_year..=last_year`.
    pub truth: Vec<GroundTruth>,
}

impl SynthCorpus {
    pub fn write_truth_csv(&self, out: impl Write) -> Result<(), SynthError> {
        let mut w = csv::Writer::from_writer(out);
        for t in &self.truth {
            w.serialize(t)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pseudo-word `i`: three syllables, alphabetic so the tokenizer keeps it.
fn word(i: usize) -> String {
    let s = SYLLABLES.len();
    [i / (s * s), (i / s) % s, i % s].iter().map(|&k| SYLLABLES[k]).collect()
}

/// Splits `total` across `years` in proportion to `growth^k`.
fn papers_per_year(total: usize, years: usize, growth: f64) -> Vec<usize> {
    let raw: Vec<f64> = (0..years).map(|k| growth.powi(k as i32)).collect();
    let sum: f64 = raw.iter().sum();
    let exact: Vec<f64> = raw.iter().map(|r| r / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..years).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let short = total - counts.iter().sum::<usize>();
    for &k in order.iter().take(short) {
        counts[k] += 1;
    }
    counts
}

struct Generator<'a> {
    config: &'a SynthConfig,
    topic_weights: Vec<f64>,
    rng: ChaCha8Rng,
    records: Vec<PaperRecord>,
    topics: Vec<usize>,
    in_degree: Vec<usize>,
}

impl Generator<'_> {
    fn pick_topic(&mut self) -> usize {
        let total: f64 = self.topic_weights.iter().sum();
        let mut r = self.rng.random::<f64>() * total;
        for (k, w) in self.topic_weights.iter().enumerate() {
            if r < *w {
                return k;
            }
            r -= w;
        }
        self.topic_weights.len() - 1
    }

    fn text(&mut self, topic: usize, len: usize) -> String {
        let c = self.config;
        (0..len)
            .map(|_| {
                // One word in ten comes from the shared background vocabulary.
                let block = if self.rng.random::<f64>() < 0.1 { c.num_topics } else { topic };
                word(block * c.words_per_topic + self.rng.random_range(0..c.words_per_topic))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn paper(&mut self, year: i32, eligible: usize, references: Option<Vec<usize>>) {
        let c = self.config;
        let idx = self.records.len();
        let topic = self.pick_topic();
        let n_auth = self.rng.random_range(1..=5usize).min(c.num_authors);
        let authors: Vec<usize> = index::sample(&mut self.rng, c.num_authors, n_auth).into_vec();
        let venue = self.rng.random_range(0..c.num_venues);
        let venue_name = if venue % 2 == 0 {
            format!("Journal of Synthetic Studies {venue}")
        } else {
            format!("Proceedings of the Synthetic Conference {venue}")
        };
        let title = self.text(topic, 6);
        let abstract_text = self.text(topic, c.abstract_words);
        let refs = match references {
            Some(r) => r,
            None => {
                let k = self.rng.random_range(0..=2 * c.mean_references).min(eligible);
                let strength = c.attachment_strength;
                let affinity = c.topic_affinity;
                let (deg, topics, tw) = (&self.in_degree, &self.topics, &self.topic_weights);
                let weight = |j: usize| {
                    let same = if topics[j] == topic { affinity } else { 1.0 };
                    (1.0 + strength * deg[j] as f64) * same * tw[topics[j]]
                };
                let mut r = if k == 0 {
                    Vec::new()
                } else {
                    index::sample_weighted(&mut self.rng, eligible, weight, k).expect("positive weights").into_vec()
                };
                r.sort_unstable();
                r
            }
        };
        for &j in &refs {
            self.in_degree[j] += 1;
        }
        let mut record = PaperRecord::new((idx + 1) as u64, year)
            .with_title(title)
            .with_authors(authors.iter().map(|a| format!("Author {a}")))
            .with_venue(venue_name)
            .with_references(refs.iter().map(|&j| (j + 1) as u64));
        record.abstract_text = abstract_text;
        record.affiliations = authors.iter().map(|a| Some(format!("Institute {}", a % 37))).collect();
        self.records.push(record);
        self.topics.push(topic);
        self.in_degree.push(0);
    }
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    config.validate()?;
    let mut g = Generator {
        config,
        topic_weights: config.weights(),
        rng: seed::rng(config.seed),
        records: Vec::with_capacity(config.num_papers),
        topics: Vec::new(),
        in_degree: Vec::new(),
    };
    let span = (config.last_year - config.first_year + 1) as usize;
    let counts = papers_per_year(config.num_papers, span, config.growth);
    for (k, &count) in counts.iter().enumerate() {
        let eligible = g.records.len();
        for _ in 0..count {
            g.paper(config.first_year + k as i32, eligible, None);
        }
    }
    let observed = g.records.len();
    let mut planted_rate = vec![0.0; observed];

    match config.future {
        FutureMode::Organic => {
            let mut per_year = *counts.last().unwrap_or(&1) as f64;
            for y in 1..=config.future_years {
                per_year *= config.growth;
                let eligible = g.records.len();
                for _ in 0..per_year.round() as usize {
                    g.paper(config.last_year + y, eligible, None);
                }
            }
        }
        FutureMode::Planted { max_rate, hops } => {
            let snapshot = build_snapshot(&g.records, config.last_year);
            let ids: Vec<PaperId> = g.records.iter().map(|r| r.id).collect();
            let graph = build_citation_graph(&snapshot, &ids)?;
            let adj = normalized_adjacency(&graph);
            let u_max = graph.out_degree.iter().copied().max().unwrap_or(0).max(1) as f64;
            let mut z = Array2::from_shape_fn((observed, 1), |(i, _)| graph.out_degree[i] as f64 / u_max);
            for _ in 0..hops {
                z = spmm(&adj, z.view())?;
            }
            let cohort: Vec<usize> = (0..observed).filter(|&i| g.records[i].year == config.last_year).collect();
            let z_max = cohort.iter().map(|&i| z[[i, 0]]).fold(0.0, f64::max);
            let noise = Normal::new(-0.5 * config.noise * config.noise, config.noise).expect("finite sigma");
            let mut wanted = Vec::new();
            for &i in &cohort {
                let s = if z_max > 0.0 { z[[i, 0]] / z_max } else { 0.0 };
                let rate = (1.0 + max_rate).powf(s) - 1.0;
                planted_rate[i] = rate;
                let c = (rate * noise.sample(&mut g.rng).exp()).round() as usize;
                wanted.extend(std::iter::repeat_n(i, c));
            }
            // Deal grouped targets round-robin so no citing paper repeats one.
            let max_c = cohort.iter().map(|&i| wanted.iter().filter(|&&w| w == i).count()).max().unwrap_or(0);
            let n_citing = max_c.max(wanted.len().div_ceil(config.mean_references.max(1))).max(1);
            let mut lists = vec![Vec::new(); n_citing];
            for (k, &target) in wanted.iter().enumerate() {
                lists[k % n_citing].push(target);
            }
            lists.shuffle(&mut g.rng);
            for mut refs in lists {
                refs.sort_unstable();
                g.paper(config.last_year + 1, observed, Some(refs));
            }
        }
    }

    let mut future = vec![0usize; observed];
    for r in &g.records[observed..] {
        for p in &r.references {
            future[(p.0 - 1) as usize] += 1;
        }
    }
    let truth = (0..observed)
        .map(|i| GroundTruth {
            paper_id: g.records[i].id,
            year: g.records[i].year,
            topic: g.topics[i],
            planted_rate: planted_rate[i],
            future_citations: future[i],
        })
        .collect();
    Ok(SynthCorpus { records: g.records, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{clean, CleanConfig};
    use crate::topics::tokenize_text;

    fn small() -> SynthConfig {
        SynthConfig { num_papers: 300, num_authors: 60, ..Default::default() }
    }

    #[test]
    fn exact_paper_count_and_years() {
        let c = generate(&small()).unwrap();
        assert_eq!(c.truth.len(), 300);
        assert!(c.records.len() > 300);
        assert!(c.records[..300].windows(2).all(|w| w[0].year <= w[1].year));
        assert!(c.records[300..].iter().all(|r| r.year == 2011));
        assert_eq!(papers_per_year(10, 3, 1.0), vec![4, 3, 3]);
        assert_eq!(papers_per_year(100, 4, 1.5).iter().sum::<usize>(), 100);
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(&small()).unwrap(), generate(&small()).unwrap());
        let other = generate(&SynthConfig { seed: 9, ..small() }).unwrap();
        assert_ne!(other.records, generate(&small()).unwrap().records);
    }

    #[test]
    fn references_point_backward_and_clean_keeps_all() {
        for future in [FutureMode::Organic, FutureMode::Planted { max_rate: 20.0, hops: 2 }] {
            let c = generate(&SynthConfig { future, ..small() }).unwrap();
            let year = |id: PaperId| c.records[(id.0 - 1) as usize].year;
            for r in &c.records {
                assert!(r.references.iter().all(|&p| year(p) < r.year), "{}", r.id);
            }
            let n = c.records.len();
            let (kept, report) = clean(c.records.clone(), &CleanConfig::default());
            assert_eq!(kept.len(), n);
            assert_eq!(report.dropped(), 0);
            assert_eq!(report.references_repaired, 0);
        }
    }

    #[test]
    fn text_survives_tokenization() {
        let c = generate(&small()).unwrap();
        let r = &c.records[0];
        assert_eq!(tokenize_text(&r.title).len(), 6);
        assert_eq!(tokenize_text(&r.abstract_text).len(), 40);
    }

    #[test]
    fn planted_counts_follow_rates() {
        let cfg = SynthConfig { future: FutureMode::Planted { max_rate: 30.0, hops: 2 }, noise: 0.0, ..small() };
        let c = generate(&cfg).unwrap();
        for t in &c.truth {
            if t.year == 2010 {
                assert_eq!(t.future_citations, t.planted_rate.round() as usize);
                assert!(t.planted_rate <= 30.0 + 1e-9);
            } else {
                assert_eq!((t.future_citations, t.planted_rate), (0, 0.0));
            }
        }
        assert!(c.truth.iter().any(|t| t.future_citations >= 29));
    }

    #[test]
    fn truth_csv_header() {
        let c = generate(&SynthConfig { num_papers: 20, ..small() }).unwrap();
        let mut buf = Vec::new();
        c.write_truth_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("paper_id,year,topic,planted_rate,future_citations\n"));
        assert_eq!(text.lines().count(), 21);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate(&SynthConfig { num_topics: 0, ..small() }).is_err());
        assert!(generate(&SynthConfig { topic_weights: Some(vec![1.0]), ..small() }).is_err());
        assert!(generate(&SynthConfig { last_year: 1990, ..small() }).is_err());
    }
}
