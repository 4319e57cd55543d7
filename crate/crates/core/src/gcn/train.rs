use std::io::Write;
use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::model::{backward, forward, forward_from_ax, loss, DropoutMasks, GcnDims, GcnModel};
use super::GcnError;
use crate::features::NormStats;
use crate::graph::{spmm, NormalizedAdjacency};
use crate::optim::{Adam, AdamConfig};
use crate::persist::{self, GCN_MODEL_FORMAT};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout_rate: f64,
    pub hidden: usize,
    pub hidden2: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Train on `ln(1 + c)` and invert with `exp(x) - 1`.
    pub log_target: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            epochs: 200,
            dropout_rate: 0.2,
            hidden: 64,
            hidden2: 64,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            log_target: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), GcnError> {
        let bad = |m: &str| Err(GcnError::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must lie in [0, 1)");
        }
        if self.hidden == 0 || self.hidden2 == 0 {
            return bad("hidden widths must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.epsilon <= 0.0 {
            return bad("adam betas must lie in [0, 1) and epsilon must be positive");
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.learning_rate, beta1: self.beta1, beta2: self.beta2, epsilon: self.epsilon }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub model: GcnModel,
    pub loss_history: Vec<f64>,
    pub norm_stats: Option<NormStats>,
    pub adjacency_fingerprint: String,
    pub log_target: bool,
}

impl TrainedModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GcnError> {
        Ok(persist::save(GCN_MODEL_FORMAT, self, path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GcnError> {
        Ok(persist::load(GCN_MODEL_FORMAT, path)?)
    }

    pub fn write_loss_history(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "epoch,loss")?;
        for (i, l) in self.loss_history.iter().enumerate() {
            writeln!(out, "{i},{l}")?;
        }
        out.flush()
    }
}

fn check_inputs(
    adj: &NormalizedAdjacency,
    x: &ArrayView2<'_, f64>,
    targets: &[f64],
    mask: &[usize],
) -> Result<(), GcnError> {
    let n = adj.len();
    if x.nrows() != n || targets.len() != n {
        return Err(GcnError::Shape(format!(
            "adjacency has {n} nodes, features {} rows, targets {} entries",
            x.nrows(),
            targets.len()
        )));
    }
    if mask.is_empty() {
        return Err(GcnError::EmptyMask);
    }
    if let Some(&i) = mask.iter().find(|&&i| i >= n) {
        return Err(GcnError::Shape(format!("mask index {i} out of range for {n} nodes")));
    }
    if mask.iter().any(|&i| !targets[i].is_finite()) {
        return Err(GcnError::NonFinite("training targets".into()));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(GcnError::NonFinite("feature matrix".into()));
    }
    Ok(())
}

/// Full-batch transductive training: forward over every node, loss on
/// `mask` only.
pub fn train(
    adj: &NormalizedAdjacency,
    x: ArrayView2<'_, f64>,
    targets: &[f64],
    mask: &[usize],
    config: &TrainConfig,
) -> Result<TrainedModel, GcnError> {
    config.validate()?;
    check_inputs(adj, &x, targets, mask)?;
    if config.log_target && mask.iter().any(|&i| targets[i] < 0.0) {
        return Err(GcnError::InvalidConfig("log target transform needs non-negative targets".into()));
    }
    let y: Vec<f64> =
        if config.log_target { targets.iter().map(|t| t.max(0.0).ln_1p()).collect() } else { targets.to_vec() };

    let dims = GcnDims { input: x.ncols(), hidden: config.hidden, hidden2: config.hidden2 };
    let mut model = GcnModel::init(dims, seed::derive(config.seed, 0))?;
    let mut dropout_rng = seed::stream_rng(config.seed, 1);
    let mut adam = Adam::new(config.adam(), &[model.w0.len(), model.w1.len(), model.w_out.len(), 1]);
    let ax = spmm(adj, x)?;
    let n = adj.len();

    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let masks =
            (config.dropout_rate > 0.0).then(|| DropoutMasks::sample(config.dropout_rate, n, dims, &mut dropout_rng));
        let cache = forward_from_ax(&model, adj, ax.clone(), masks).map_err(|e| match e {
            GcnError::NonFinite(_) => GcnError::Diverged { epoch },
            e => e,
        })?;
        let l = loss(cache.output.as_slice().expect("contiguous"), &y, mask)?;
        if !l.is_finite() {
            return Err(GcnError::Diverged { epoch });
        }
        history.push(l);
        let g = backward(&model, adj, &cache, &y, mask)?;
        let mut bias = [model.bias];
        adam.step(
            &mut [
                model.w0.as_slice_mut().expect("contiguous"),
                model.w1.as_slice_mut().expect("contiguous"),
                model.w_out.as_slice_mut().expect("contiguous"),
                &mut bias,
            ],
            &[
                g.w0.as_slice().expect("contiguous"),
                g.w1.as_slice().expect("contiguous"),
                g.w_out.as_slice().expect("contiguous"),
                &[g.bias],
            ],
        );
        model.bias = bias[0];
        if !model.is_finite() {
            return Err(GcnError::Diverged { epoch });
        }
    }
    log::debug!("gcn trained: first loss {:?}, last loss {:?}", history.first(), history.last());

    Ok(TrainedModel {
        model,
        loss_history: history,
        norm_stats: None,
        adjacency_fingerprint: adj.fingerprint(),
        log_target: config.log_target,
    })
}

/// Per-node predicted counts: no dropout, inverse transform, clamped at 0.
pub fn predict(
    trained: &TrainedModel,
    adj: &NormalizedAdjacency,
    x: ArrayView2<'_, f64>,
) -> Result<Vec<f64>, GcnError> {
    let found = adj.fingerprint();
    if found != trained.adjacency_fingerprint {
        return Err(GcnError::FingerprintMismatch { expected: trained.adjacency_fingerprint.clone(), found });
    }
    let cache = forward(&trained.model, adj, x, None)?;
    Ok(cache.output.iter().map(|&v| inverse_transform(v, trained.log_target)).collect())
}

pub(crate) fn inverse_transform(raw: f64, log_target: bool) -> f64 {
    let v = if log_target { raw.exp_m1() } else { raw };
    v.max(0.0)
}
