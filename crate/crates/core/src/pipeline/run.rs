use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{AtStage, ErrorClass, ExperimentConfig, PipelineError, Stage};
use crate::baselines::{fit_baseline, predict_baseline, write_feature_importance, FittedBaseline, ModelKind};
use crate::corpus::{temporal_split, CaseSpec, CorpusCache, PaperId, SplitSpec};
use crate::eval::{evaluate, kfold, MetricsReport, CSV_HEADER};
use crate::features::{leaking_columns, normalize, topic_popularity, FeatureContext, FeatureMatrix, VenueRanks};
use crate::gcn::{self, TrainedModel};
use crate::graph::{build_citation_graph, normalized_adjacency, CitationGraph, NormalizedAdjacency};
use crate::seed;
use crate::topics::{fit_lda, infer_doc_topics, tokenize, DocTopics, TopicModel};

/// Everything shared by the models of one case.
#[derive(Debug, Clone)]
pub struct PreparedCase {
    pub case: CaseSpec,
    pub split: SplitSpec,
    pub graph: CitationGraph,
    pub adjacency: NormalizedAdjacency,
    pub topic_model: TopicModel,
    pub doc_topics: DocTopics,
    pub raw_features: FeatureMatrix,
    /// Normalized with statistics from the training rows.
    pub features: FeatureMatrix,
    /// Per graph node; zero outside the case window.
    pub targets: Vec<f64>,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl PreparedCase {
    pub fn rows_of(&self, ids: &[PaperId]) -> Vec<usize> {
        ids.iter().map(|&id| self.graph.position(id).expect("split ids are graph nodes")).collect()
    }

    pub fn targets_at(&self, rows: &[usize]) -> Vec<f64> {
        rows.iter().map(|&r| self.targets[r]).collect()
    }

    pub fn case_name(&self) -> String {
        self.case.label.to_string()
    }
}

fn stage_err(stage: Stage, message: impl Into<String>) -> PipelineError {
    PipelineError::new(stage, ErrorClass::Data, message)
}

/// Snapshots the case, fits (or reuses) the topic model, and builds the
/// graph, features and targets.
pub fn prepare_case(
    cache: &CorpusCache,
    config: &ExperimentConfig,
    topic_model: Option<TopicModel>,
) -> Result<PreparedCase, PipelineError> {
    config.validate()?;
    let case = config.case_spec()?;
    let last = cache.max_year().ok_or_else(|| stage_err(Stage::Ingest, "corpus is empty"))?;
    if last < case.target_cutoff() {
        return Err(stage_err(
            Stage::Features,
            format!(
                "corpus ends in {last} but the {} case needs citations through {}",
                case.label,
                case.target_cutoff()
            ),
        ));
    }
    let snapshot = cache.snapshot(case.feature_cutoff());
    let target_snapshot = cache.snapshot(case.target_cutoff());
    let split = temporal_split(&snapshot, case, seed::derive(config.seed, 1)).at(Stage::Features)?;
    log::info!(
        "case {}: {} papers in snapshot, {} train, {} test",
        case.label,
        snapshot.len(),
        split.train_ids.len(),
        split.test_ids.len()
    );

    let node_ids: Vec<PaperId> = snapshot.ids().collect();
    let graph = build_citation_graph(&snapshot, &node_ids).at(Stage::Graph)?;
    let adjacency = normalized_adjacency(&graph);

    let docs: Vec<(PaperId, Vec<String>)> = node_ids.iter().map(|&id| (id, tokenize(&snapshot.papers[&id]))).collect();
    let topic_model = match topic_model {
        Some(m) => m,
        None => {
            let lda = crate::topics::LdaConfig { seed: seed::derive(config.seed, 2), ..config.lda.clone() };
            let tokens: Vec<Vec<String>> = docs.iter().map(|(_, t)| t.clone()).collect();
            fit_lda(&tokens, &lda).at(Stage::Topics)?
        }
    };
    let doc_topics = infer_doc_topics(&topic_model, &docs);
    let popularity =
        topic_popularity(&doc_topics, |id| snapshot.cited_by_count(id) as f64, &split.train_ids).at(Stage::Features)?;

    let ranks = match &config.venue_ranks {
        Some(path) => Some(VenueRanks::from_csv(File::open(path).at(Stage::Features)?).at(Stage::Features)?),
        None => None,
    };
    let context = FeatureContext {
        snapshot: &snapshot,
        graph: &graph,
        doc_topics: &doc_topics,
        topic_popularity: &popularity,
        venue_ranks: ranks.as_ref(),
    };
    let raw_features = context.feature_matrix().at(Stage::Features)?;

    let position = |id: PaperId| graph.position(id).expect("snapshot ids are graph nodes");
    let train_rows: Vec<usize> = split.train_ids.iter().map(|&id| position(id)).collect();
    let test_rows: Vec<usize> = split.test_ids.iter().map(|&id| position(id)).collect();
    let features = normalize(&raw_features, &train_rows).at(Stage::Features)?;

    let mut targets = vec![0.0; graph.len()];
    for &id in split.train_ids.iter().chain(&split.test_ids) {
        let year = snapshot.papers[&id].year;
        targets[position(id)] =
            target_snapshot.citation_count(id, year, year + case.horizon_years).at(Stage::Features)? as f64;
    }

    let train_targets: Vec<f64> = train_rows.iter().map(|&r| targets[r]).collect();
    let leaks = leaking_columns(&features, &train_rows, &train_targets, config.leak_threshold);
    if let Some((column, r)) = leaks.first() {
        return Err(stage_err(
            Stage::Features,
            format!("feature {column:?} correlates with the target (r = {r:.6}); snapshot leak suspected"),
        ));
    }

    Ok(PreparedCase {
        case,
        split,
        graph,
        adjacency,
        topic_model,
        doc_topics,
        raw_features,
        features,
        targets,
        train_rows,
        test_rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedArtifact {
    Gcn(TrainedModel),
    Baseline(FittedBaseline),
}

impl TrainedArtifact {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedArtifact::Gcn(_) => ModelKind::Gcn,
            TrainedArtifact::Baseline(b) => b.kind,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        let stage = Stage::Output;
        match self {
            TrainedArtifact::Gcn(m) => m.save(path).at(stage),
            TrainedArtifact::Baseline(b) => b.save(path).at(stage),
        }
    }
}

pub fn load_artifact(kind: ModelKind, path: impl AsRef<Path>) -> Result<TrainedArtifact, PipelineError> {
    let stage = Stage::Evaluate(kind);
    let artifact = match kind {
        ModelKind::Gcn => TrainedArtifact::Gcn(TrainedModel::load(path).at(stage)?),
        _ => TrainedArtifact::Baseline(FittedBaseline::load(path).at(stage)?),
    };
    if artifact.kind() != kind {
        return Err(stage_err(stage, format!("model file holds {} not {kind}", artifact.kind())));
    }
    Ok(artifact)
}

pub fn model_seed(master: u64, kind: ModelKind) -> u64 {
    let k = ModelKind::ALL.iter().position(|&m| m == kind).expect("known model") as u64;
    seed::derive(master, 10 + k)
}

/// Fits `kind` with loss (or fit) restricted to `rows`.
pub fn train_model(
    prepared: &PreparedCase,
    kind: ModelKind,
    config: &ExperimentConfig,
    rows: &[usize],
    seed: u64,
) -> Result<TrainedArtifact, PipelineError> {
    let stage = Stage::Train(kind);
    match kind {
        ModelKind::Gcn => {
            let cfg = gcn::TrainConfig { seed, ..config.gcn.clone() };
            let mut trained =
                gcn::train(&prepared.adjacency, prepared.features.values.view(), &prepared.targets, rows, &cfg)
                    .at(stage)?;
            trained.norm_stats = prepared.features.norm_stats.clone();
            Ok(TrainedArtifact::Gcn(trained))
        }
        _ => {
            let x = prepared.features.select_rows(rows);
            let y = prepared.targets_at(rows);
            Ok(TrainedArtifact::Baseline(fit_baseline(kind, x.view(), &y, &config.baselines, seed).at(stage)?))
        }
    }
}

/// Predictions for `rows` and their metrics against the case targets.
pub fn evaluate_model(
    prepared: &PreparedCase,
    artifact: &TrainedArtifact,
    rows: &[usize],
) -> Result<(MetricsReport, Vec<f64>), PipelineError> {
    let stage = Stage::Evaluate(artifact.kind());
    let predictions = match artifact {
        TrainedArtifact::Gcn(m) => {
            let all = gcn::predict(m, &prepared.adjacency, prepared.features.values.view()).at(stage)?;
            rows.iter().map(|&r| all[r]).collect()
        }
        TrainedArtifact::Baseline(b) => predict_baseline(b, prepared.features.select_rows(rows).view()).at(stage)?,
    };
    let report = evaluate(&prepared.targets_at(rows), &predictions, prepared.features.n_cols()).at(stage)?;
    Ok((report, predictions))
}

#[derive(Debug, Clone)]
pub struct ModelOutcome {
    pub kind: ModelKind,
    pub report: MetricsReport,
    /// Aligned with `PreparedCase::test_rows`.
    pub predictions: Vec<f64>,
    pub cv: Vec<MetricsReport>,
    pub artifact: TrainedArtifact,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub prepared: PreparedCase,
    pub outcomes: Vec<ModelOutcome>,
}

pub fn run_experiment(
    cache: &CorpusCache,
    config: &ExperimentConfig,
    topic_model: Option<TopicModel>,
) -> Result<ExperimentResult, PipelineError> {
    let prepared = prepare_case(cache, config, topic_model)?;
    let mut outcomes = Vec::with_capacity(config.models.len());
    for &kind in &config.models {
        let seed = model_seed(config.seed, kind);
        let mut cv = Vec::new();
        if config.cv_folds > 0 {
            let folds =
                kfold(&prepared.train_rows, config.cv_folds, seed::derive(config.seed, 3)).at(Stage::Train(kind))?;
            for (f, fold) in folds.iter().enumerate() {
                let artifact = train_model(&prepared, kind, config, &fold.train, seed::derive(seed, 100 + f as u64))?;
                cv.push(evaluate_model(&prepared, &artifact, &fold.validation)?.0);
            }
        }
        let artifact = train_model(&prepared, kind, config, &prepared.train_rows, seed)?;
        let (report, predictions) = evaluate_model(&prepared, &artifact, &prepared.test_rows)?;
        log::info!("{kind}: mae {:.4} rmse {:.4} r2 {:.4}", report.mae, report.rmse, report.r2);
        outcomes.push(ModelOutcome { kind, report, predictions, cv, artifact });
    }
    Ok(ExperimentResult { prepared, outcomes })
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    Ok(BufWriter::new(File::create(path).at(Stage::Output)?))
}

pub fn model_file(dir: &Path, kind: ModelKind) -> PathBuf {
    dir.join("models").join(format!("{}.bin", kind.name().to_ascii_lowercase()))
}

#[derive(Serialize)]
struct JsonRow<'a> {
    model: ModelKind,
    case: String,
    #[serde(flatten)]
    metrics: &'a MetricsReport,
}

/// Writes metrics, predictions, features and model files under `dir`.
pub fn write_experiment(result: &ExperimentResult, dir: &Path) -> Result<(), PipelineError> {
    let out = Stage::Output;
    fs::create_dir_all(dir.join("models")).at(out)?;
    let p = &result.prepared;
    let case = p.case_name();

    let mut w = csv::Writer::from_writer(create(&dir.join("metrics.csv"))?);
    w.write_record(CSV_HEADER).at(out)?;
    for o in &result.outcomes {
        w.write_record(o.report.csv_row(o.kind.name(), &case, None)).at(out)?;
    }
    w.flush().at(out)?;

    let rows: Vec<JsonRow> =
        result.outcomes.iter().map(|o| JsonRow { model: o.kind, case: case.clone(), metrics: &o.report }).collect();
    fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&rows).at(out)? + "\n").at(out)?;

    if result.outcomes.iter().any(|o| !o.cv.is_empty()) {
        let mut w = csv::Writer::from_writer(create(&dir.join("cv_metrics.csv"))?);
        w.write_record(CSV_HEADER).at(out)?;
        for o in &result.outcomes {
            for (f, r) in o.cv.iter().enumerate() {
                w.write_record(r.csv_row(o.kind.name(), &case, Some(f))).at(out)?;
            }
        }
        w.flush().at(out)?;
    }

    let mut w = csv::Writer::from_writer(create(&dir.join("predictions.csv"))?);
    let mut header = vec!["paper_id".to_string(), "target".to_string()];
    header.extend(result.outcomes.iter().map(|o| o.kind.name().to_string()));
    w.write_record(&header).at(out)?;
    for (k, &row) in p.test_rows.iter().enumerate() {
        let mut rec = vec![p.graph.node_ids[row].to_string(), p.targets[row].to_string()];
        rec.extend(result.outcomes.iter().map(|o| o.predictions[k].to_string()));
        w.write_record(&rec).at(out)?;
    }
    w.flush().at(out)?;

    p.features.write_csv(create(&dir.join("features.csv"))?).at(out)?;
    if let Some(stats) = &p.features.norm_stats {
        fs::write(dir.join("norm_stats.json"), stats.to_json()).at(out)?;
    }

    for o in &result.outcomes {
        o.artifact.save(model_file(dir, o.kind))?;
        match &o.artifact {
            TrainedArtifact::Gcn(m) => m.write_loss_history(create(&dir.join("gcn_loss.csv"))?).at(out)?,
            TrainedArtifact::Baseline(b) => {
                if let Some(counts) = b.split_counts() {
                    let path = dir.join(format!("importance_{}.csv", o.kind.name().to_ascii_lowercase()));
                    write_feature_importance(&p.features.columns, &counts, create(&path)?).at(out)?;
                }
            }
        }
    }
    Ok(())
}
