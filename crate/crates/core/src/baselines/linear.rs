use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::BaselineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }
}

/// Ridge least squares on centered data; the intercept is not penalized.
pub fn fit_linear(x: ArrayView2<'_, f64>, y: &[f64], ridge_lambda: f64) -> Result<LinearModel, BaselineError> {
    let (n, m) = x.dim();
    if n == 0 || y.len() != n {
        return Err(BaselineError::Shape(format!("{n} rows vs {} targets", y.len())));
    }
    if !(ridge_lambda >= 0.0) {
        return Err(BaselineError::InvalidConfig("ridge_lambda must be non-negative".into()));
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let x_mean: Vec<f64> = (0..m).map(|j| x.column(j).sum() / n as f64).collect();
    let xc = DMatrix::from_fn(n, m, |i, j| x[[i, j]] - x_mean[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));

    let mut gram = xc.transpose() * &xc;
    for j in 0..m {
        gram[(j, j)] += ridge_lambda;
    }
    let rhs = xc.transpose() * yc;
    let scale = (0..m).map(|j| gram[(j, j)].abs()).fold(0.0, f64::max);
    let chol = gram.clone().cholesky().ok_or(BaselineError::Singular)?;
    // Cholesky succeeds on numerically rank-deficient systems; reject tiny pivots.
    let l = chol.l_dirty();
    if m > 0 && (0..m).any(|j| l[(j, j)] * l[(j, j)] <= 1e-12 * scale) {
        return Err(BaselineError::Singular);
    }
    let w = chol.solve(&rhs);
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = y_mean - weights.iter().zip(&x_mean).map(|(w, mu)| w * mu).sum::<f64>();
    if !bias.is_finite() || !weights.iter().all(|w| w.is_finite()) {
        return Err(BaselineError::NonFinite("linear solve".into()));
    }
    Ok(LinearModel { weights, bias })
}
