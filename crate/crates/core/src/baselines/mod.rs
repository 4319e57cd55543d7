//! Comparison regressors: ridge linear regression, random forest,
//! gradient-boosted trees and a one-hidden-layer dense network.

mod dnn;
mod forest;
mod gbt;
mod linear;
mod tree;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use dnn::{fit_dnn, DnnConfig, DnnGradients, DnnModel};
pub use forest::{fit_random_forest, RandomForest, RfConfig};
pub use gbt::{fit_gbt, GbtConfig, GradientBoosting};
pub use linear::{fit_linear, LinearModel};
pub use tree::{fit_tree, Node, RegressionTree, Split, TreeParams};

use crate::persist::{self, PersistError, BASELINE_MODEL_FORMAT};

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("singular normal equations; use a positive ridge penalty")]
    Singular,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid baseline configuration: {0}")]
    InvalidConfig(String),
    #[error("{0} is not a baseline model")]
    NotBaseline(ModelKind),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Every model the toolkit can train, with the names used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "LR")]
    Linear,
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "XGBoost")]
    Boosting,
    #[serde(rename = "DNN")]
    Dense,
    #[serde(rename = "GCN")]
    Gcn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::Linear, ModelKind::RandomForest, ModelKind::Boosting, ModelKind::Dense, ModelKind::Gcn];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "LR",
            ModelKind::RandomForest => "RF",
            ModelKind::Boosting => "XGBoost",
            ModelKind::Dense => "DNN",
            ModelKind::Gcn => "GCN",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lr" | "linear" => Ok(ModelKind::Linear),
            "rf" | "forest" => Ok(ModelKind::RandomForest),
            "xgboost" | "gbt" => Ok(ModelKind::Boosting),
            "dnn" => Ok(ModelKind::Dense),
            "gcn" => Ok(ModelKind::Gcn),
            other => Err(format!("unknown model {other:?}; expected LR, RF, XGBoost, DNN or GCN")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub ridge_lambda: f64,
    pub rf: RfConfig,
    pub gbt: GbtConfig,
    pub dnn: DnnConfig,
    /// Fit on `ln(1 + c)` and invert at prediction.
    pub log_target: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            ridge_lambda: 1e-8,
            rf: RfConfig::default(),
            gbt: GbtConfig::default(),
            dnn: DnnConfig::default(),
            log_target: true,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |m: &str| Err(BaselineError::InvalidConfig(m.to_string()));
        if !(self.ridge_lambda >= 0.0) {
            return bad("ridge_lambda must be non-negative");
        }
        if self.rf.n_estimators == 0 || self.rf.max_depth == 0 || self.rf.min_samples_split < 2 {
            return bad("rf needs n_estimators >= 1, max_depth >= 1, min_samples_split >= 2");
        }
        if self.gbt.n_estimators == 0 || self.gbt.max_depth == 0 || self.gbt.min_samples_split < 2 {
            return bad("gbt needs n_estimators >= 1, max_depth >= 1, min_samples_split >= 2");
        }
        if !(self.gbt.learning_rate > 0.0 && self.gbt.learning_rate <= 1.0) {
            return bad("gbt learning_rate must lie in (0, 1]");
        }
        let d = &self.dnn;
        if d.hidden == 0 || d.batch_size == 0 || d.epochs == 0 {
            return bad("dnn needs hidden, batch_size and epochs >= 1");
        }
        if !(d.learning_rate > 0.0) || !(0.0..1.0).contains(&d.dropout_rate) {
            return bad("dnn learning_rate must be positive and dropout_rate in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaselineModel {
    Linear(LinearModel),
    RandomForest(RandomForest),
    Boosting(GradientBoosting),
    Dense(DnnModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedBaseline {
    pub kind: ModelKind,
    pub model: BaselineModel,
    pub n_features: usize,
    pub log_target: bool,
    /// Per-epoch loss for the dense network, per-stage MSE for boosting.
    pub loss_history: Vec<f64>,
}

impl FittedBaseline {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BaselineError> {
        Ok(persist::save(BASELINE_MODEL_FORMAT, self, path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BaselineError> {
        Ok(persist::load(BASELINE_MODEL_FORMAT, path)?)
    }

    /// Split counts per feature for the tree ensembles.
    pub fn split_counts(&self) -> Option<Vec<usize>> {
        let trees = match &self.model {
            BaselineModel::RandomForest(f) => &f.trees,
            BaselineModel::Boosting(g) => &g.trees,
            _ => return None,
        };
        let mut counts = vec![0; self.n_features];
        for t in trees {
            for (c, k) in counts.iter_mut().zip(t.split_counts()) {
                *c += k;
            }
        }
        Some(counts)
    }
}

pub fn fit_baseline(
    kind: ModelKind,
    x: ArrayView2<'_, f64>,
    y: &[f64],
    config: &BaselineConfig,
    seed: u64,
) -> Result<FittedBaseline, BaselineError> {
    config.validate()?;
    if x.nrows() == 0 || x.nrows() != y.len() {
        return Err(BaselineError::Shape(format!("{} rows vs {} targets", x.nrows(), y.len())));
    }
    if !y.iter().all(|v| v.is_finite()) || !x.iter().all(|v| v.is_finite()) {
        return Err(BaselineError::NonFinite("training data".into()));
    }
    if config.log_target && y.iter().any(|&v| v < 0.0) {
        return Err(BaselineError::InvalidConfig("log target transform needs non-negative targets".into()));
    }
    let yt: Vec<f64> = if config.log_target { y.iter().map(|v| v.ln_1p()).collect() } else { y.to_vec() };
    let x = x.as_standard_layout();
    let x = x.view();
    let (model, loss_history) = match kind {
        ModelKind::Linear => (BaselineModel::Linear(fit_linear(x, &yt, config.ridge_lambda)?), Vec::new()),
        ModelKind::RandomForest => {
            (BaselineModel::RandomForest(fit_random_forest(x, &yt, &config.rf, seed)), Vec::new())
        }
        ModelKind::Boosting => {
            let g = fit_gbt(x, &yt, &config.gbt, seed);
            let h = g.stage_mse.clone();
            (BaselineModel::Boosting(g), h)
        }
        ModelKind::Dense => {
            let (m, h) = fit_dnn(x, &yt, &config.dnn, seed)?;
            (BaselineModel::Dense(m), h)
        }
        ModelKind::Gcn => return Err(BaselineError::NotBaseline(kind)),
    };
    Ok(FittedBaseline { kind, model, n_features: x.ncols(), log_target: config.log_target, loss_history })
}

/// Predicted counts: inverse target transform, clamped below at 0.
pub fn predict_baseline(fitted: &FittedBaseline, x: ArrayView2<'_, f64>) -> Result<Vec<f64>, BaselineError> {
    if x.ncols() != fitted.n_features {
        return Err(BaselineError::Shape(format!("model expects {} features, got {}", fitted.n_features, x.ncols())));
    }
    let x = x.as_standard_layout();
    let rows = x.rows();
    let raw: Vec<f64> = match &fitted.model {
        BaselineModel::Linear(m) => {
            rows.into_iter().map(|r| m.predict_row(r.as_slice().expect("standard layout"))).collect()
        }
        BaselineModel::RandomForest(m) => {
            rows.into_iter().map(|r| m.predict_row(r.as_slice().expect("standard layout"))).collect()
        }
        BaselineModel::Boosting(m) => {
            rows.into_iter().map(|r| m.predict_row(r.as_slice().expect("standard layout"))).collect()
        }
        BaselineModel::Dense(m) => m.predict(x.view()).to_vec(),
    };
    if !raw.iter().all(|v| v.is_finite()) {
        return Err(BaselineError::NonFinite("predictions".into()));
    }
    Ok(raw
        .into_iter()
        .map(|v| {
            let v = if fitted.log_target { v.exp_m1() } else { v };
            v.max(0.0)
        })
        .collect())
}

pub fn write_feature_importance(columns: &[String], counts: &[usize], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "feature,splits")?;
    for (c, k) in columns.iter().zip(counts) {
        writeln!(out, "{c},{k}")?;
    }
    out.flush()
}
