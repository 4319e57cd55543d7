//! End-to-end experiments: snapshot a case, build topics, graph and
//! features, train the requested models, and score them on the held-out
//! split.

mod report;
mod run;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use report::{merge_reports, read_metrics_csv, MergedReport, MetricsRow};
pub use run::{
    evaluate_model, load_artifact, model_file, model_seed, prepare_case, run_experiment, train_model, write_experiment,
    ExperimentResult, ModelOutcome, PreparedCase, TrainedArtifact,
};

use crate::baselines::{BaselineConfig, BaselineError, ModelKind};
use crate::corpus::{CaseLabel, CaseSpec, CorpusError};
use crate::eval::EvalError;
use crate::features::FeatureError;
use crate::gcn::{GcnError, TrainConfig};
use crate::graph::GraphError;
use crate::persist::PersistError;
use crate::synth::SynthError;
use crate::topics::{LdaConfig, TopicError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Corpus file; ignored when a prebuilt cache is supplied.
    pub input: Option<PathBuf>,
    pub case: CaseLabel,
    /// Publication window for `case = "custom"`.
    pub window: Option<(i32, i32)>,
    /// Horizon in years for `case = "custom"`.
    pub horizon_years: Option<i32>,
    pub models: Vec<ModelKind>,
    pub gcn: TrainConfig,
    pub baselines: BaselineConfig,
    pub lda: LdaConfig,
    /// Optional `venue,rank` CSV.
    pub venue_ranks: Option<PathBuf>,
    /// Folds for cross-validation inside the training portion; 0 skips it.
    pub cv_folds: usize,
    /// Abort when a feature column correlates with the target beyond this.
    pub leak_threshold: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            input: None,
            case: CaseLabel::OneYear,
            window: None,
            horizon_years: None,
            models: ModelKind::ALL.to_vec(),
            gcn: TrainConfig::default(),
            baselines: BaselineConfig::default(),
            lda: LdaConfig::default(),
            venue_ranks: None,
            cv_folds: 0,
            leak_threshold: 0.999,
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| PipelineError::config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| PipelineError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn case_spec(&self) -> Result<CaseSpec, PipelineError> {
        match self.case {
            CaseLabel::Custom => match (self.window, self.horizon_years) {
                (Some(w), Some(h)) if w.0 <= w.1 && h >= 0 => Ok(CaseSpec::custom(w, h)),
                _ => Err(PipelineError::config("custom case needs window [start, end] and horizon_years >= 0")),
            },
            label => Ok(CaseSpec::standard(label).expect("standard case")),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.models.is_empty() {
            return Err(PipelineError::config("at least one model is required"));
        }
        self.case_spec()?;
        self.gcn.validate().map_err(|e| PipelineError::config(e.to_string()))?;
        self.baselines.validate().map_err(|e| PipelineError::config(e.to_string()))?;
        if self.lda.num_topics == 0 || self.lda.iterations == 0 {
            return Err(PipelineError::config("lda needs num_topics >= 1 and iterations >= 1"));
        }
        if self.cv_folds == 1 {
            return Err(PipelineError::config("cv_folds must be 0 or at least 2"));
        }
        if !(0.0..=1.0).contains(&self.leak_threshold) {
            return Err(PipelineError::config("leak_threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Failure classes, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numeric => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Synth,
    Topics,
    Graph,
    Features,
    Train(ModelKind),
    Evaluate(ModelKind),
    Report,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Config => f.write_str("config"),
            Stage::Ingest => f.write_str("ingest"),
            Stage::Synth => f.write_str("synth"),
            Stage::Topics => f.write_str("topics"),
            Stage::Graph => f.write_str("graph"),
            Stage::Features => f.write_str("features"),
            Stage::Train(m) => write!(f, "train {m}"),
            Stage::Evaluate(m) => write!(f, "evaluate {m}"),
            Stage::Report => f.write_str("report"),
            Stage::Output => f.write_str("output"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub class: ErrorClass,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, class: ErrorClass, message: impl Into<String>) -> Self {
        PipelineError { stage, class, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Stage::Config, ErrorClass::Config, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

/// Attaches a stage to a module error, classifying it on the way.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

trait Classify: fmt::Display {
    fn class(&self) -> ErrorClass {
        ErrorClass::Data
    }
}

impl Classify for CorpusError {}
impl Classify for GraphError {}
impl Classify for PersistError {}
impl Classify for std::io::Error {}
impl Classify for csv::Error {}
impl Classify for serde_json::Error {}
impl Classify for EvalError {}

impl Classify for SynthError {
    fn class(&self) -> ErrorClass {
        match self {
            SynthError::InvalidConfig(_) => ErrorClass::Config,
            _ => ErrorClass::Data,
        }
    }
}

impl Classify for TopicError {
    fn class(&self) -> ErrorClass {
        match self {
            TopicError::InvalidConfig(_) => ErrorClass::Config,
            _ => ErrorClass::Data,
        }
    }
}

impl Classify for FeatureError {
    fn class(&self) -> ErrorClass {
        match self {
            FeatureError::NonFinite { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }
}

impl Classify for GcnError {
    fn class(&self) -> ErrorClass {
        match self {
            GcnError::NonFinite(_) | GcnError::Diverged { .. } => ErrorClass::Numeric,
            GcnError::InvalidConfig(_) => ErrorClass::Config,
            _ => ErrorClass::Data,
        }
    }
}

impl Classify for BaselineError {
    fn class(&self) -> ErrorClass {
        match self {
            BaselineError::NonFinite(_) | BaselineError::Diverged { .. } | BaselineError::Singular => {
                ErrorClass::Numeric
            }
            BaselineError::InvalidConfig(_) | BaselineError::NotBaseline(_) => ErrorClass::Config,
            _ => ErrorClass::Data,
        }
    }
}

impl<T, E: Classify> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::new(stage, e.class(), e.to_string()))
    }
}
