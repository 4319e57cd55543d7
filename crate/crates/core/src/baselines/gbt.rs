use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, RegressionTree, TreeParams};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig { learning_rate: 0.001, n_estimators: 500, max_depth: 4, min_samples_split: 2 }
    }
}

/// Squared-loss gradient boosting: `F_k = F_{k-1} + lr * tree_k`,
/// `F_0 = mean(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    /// Training MSE after each stage; entry 0 is `F_0`.
    pub stage_mse: Vec<f64>,
}

impl GradientBoosting {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }
}

pub fn fit_gbt(x: ArrayView2<'_, f64>, y: &[f64], config: &GbtConfig, seed: u64) -> GradientBoosting {
    let n = y.len();
    let init = if n == 0 { 0.0 } else { y.iter().sum::<f64>() / n as f64 };
    let params =
        TreeParams { max_depth: config.max_depth, min_samples_split: config.min_samples_split, max_features: None };
    let rows: Vec<usize> = (0..n).collect();
    // Splits consider every feature, so the stream is never consumed.
    let mut rng = seed::rng(seed);
    let mut f = vec![init; n];
    let mse =
        |f: &[f64]| if n == 0 { 0.0 } else { f.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64 };
    let mut stage_mse = vec![mse(&f)];
    let mut trees = Vec::with_capacity(config.n_estimators);
    for _ in 0..config.n_estimators {
        let residual: Vec<f64> = y.iter().zip(&f).map(|(a, b)| a - b).collect();
        let tree = fit_tree(x, &residual, &rows, params, &mut rng);
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += config.learning_rate * tree.predict_row(x.row(i).as_slice().expect("row-major features"));
        }
        stage_mse.push(mse(&f));
        trees.push(tree);
    }
    GradientBoosting { init, learning_rate: config.learning_rate, trees, stage_mse }
}
