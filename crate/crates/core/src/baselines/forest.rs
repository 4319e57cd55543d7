use ndarray::ArrayView2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, RegressionTree, TreeParams};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfConfig {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig { n_estimators: 500, max_depth: 2, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
}

impl RandomForest {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Bagged CART trees with `sqrt(m)` candidate features per split. Tree `t`
/// draws from its own seed stream, so the result does not depend on thread
/// scheduling.
pub fn fit_random_forest(x: ArrayView2<'_, f64>, y: &[f64], config: &RfConfig, seed: u64) -> RandomForest {
    let (n, m) = x.dim();
    let params = TreeParams {
        max_depth: config.max_depth,
        min_samples_split: config.min_samples_split,
        max_features: Some(((m as f64).sqrt() as usize).max(1)),
    };
    let trees = (0..config.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::stream_rng(seed, t as u64);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            fit_tree(x, y, &rows, params, &mut rng)
        })
        .collect();
    RandomForest { trees }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn depth_cap_and_constant_target() {
        let x = Array2::from_shape_fn((50, 4), |(i, j)| ((i * 31 + j * 7) % 23) as f64);
        let f = fit_random_forest(x.view(), &[3.0; 50], &RfConfig { n_estimators: 20, ..Default::default() }, 1);
        assert!(f.trees.iter().all(|t| t.max_depth() == 0));
        assert!((f.predict_row(&[1.0, 2.0, 3.0, 4.0]) - 3.0).abs() < 1e-12);
        let y: Vec<f64> = (0..50).map(|i| (i % 9) as f64).collect();
        let f = fit_random_forest(x.view(), &y, &RfConfig { n_estimators: 20, ..Default::default() }, 1);
        assert!(f.trees.iter().all(|t| t.max_depth() <= 2));
    }

    #[test]
    fn recovers_a_step() {
        let n = 400;
        let x = Array2::from_shape_fn((n, 1), |(i, _)| -1.0 + 2.0 * i as f64 / (n - 1) as f64);
        let y: Vec<f64> = x.column(0).iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
        let f = fit_random_forest(x.view(), &y, &RfConfig::default(), 7);
        let mse = (0..200)
            .map(|k| {
                let v = -0.995 + 0.01 * k as f64;
                (f.predict_row(&[v]) - if v > 0.0 { 1.0 } else { 0.0 }).powi(2)
            })
            .sum::<f64>()
            / 200.0;
        assert!(mse < 0.05, "mse {mse}");
    }

    #[test]
    fn deterministic() {
        let x = Array2::from_shape_fn((60, 3), |(i, j)| ((i * 13 + j) % 11) as f64);
        let y: Vec<f64> = (0..60).map(|i| (i % 5) as f64).collect();
        let cfg = RfConfig { n_estimators: 30, ..Default::default() };
        assert_eq!(fit_random_forest(x.view(), &y, &cfg, 4), fit_random_forest(x.view(), &y, &cfg, 4));
    }
}
