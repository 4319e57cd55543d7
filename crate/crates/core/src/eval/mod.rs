//! Regression metrics and k-fold partitioning.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::seed;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {0} targets vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("every target is zero; MAPE is undefined")]
    AllZeroTargets,
    #[error("targets have zero variance; R² is undefined")]
    ZeroVariance,
    #[error("adjusted R² needs n > p + 1 (n = {n}, p = {p})")]
    TooFewSamples { n: usize, p: usize },
    #[error("cannot split {n} ids into {k} folds")]
    TooFewIds { n: usize, k: usize },
}

fn check(y: &[f64], yhat: &[f64]) -> Result<(), EvalError> {
    if y.len() != yhat.len() {
        return Err(EvalError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64, EvalError> {
    check(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64, EvalError> {
    check(y, yhat)?;
    Ok((y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64).sqrt())
}

/// Mean absolute percentage error over samples with `y != 0`, returned
/// with the number of such samples.
pub fn mape(y: &[f64], yhat: &[f64]) -> Result<(f64, usize), EvalError> {
    check(y, yhat)?;
    let (sum, support) = y
        .iter()
        .zip(yhat)
        .filter(|(a, _)| **a != 0.0)
        .fold((0.0, 0usize), |(s, k), (a, b)| (s + ((a - b) / a).abs(), k + 1));
    if support == 0 {
        return Err(EvalError::AllZeroTargets);
    }
    Ok((sum / support as f64, support))
}

pub fn r2(y: &[f64], yhat: &[f64]) -> Result<f64, EvalError> {
    check(y, yhat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
    if y.len() < 2 || ss_tot == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn adjusted_r2(r2: f64, n: usize, p: usize) -> Result<f64, EvalError> {
    if n <= p + 1 {
        return Err(EvalError::TooFewSamples { n, p });
    }
    Ok(1.0 - (1.0 - r2) * (n - 1) as f64 / (n - p - 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub rmse: f64,
    pub mape: f64,
    pub r2: f64,
    pub adjusted_r2: f64,
    pub n: usize,
    pub p: usize,
    pub mape_support: usize,
}

/// All five metrics on raw counts; `p` is the predictor count.
pub fn evaluate(y: &[f64], yhat: &[f64], p: usize) -> Result<MetricsReport, EvalError> {
    let r2v = r2(y, yhat)?;
    let (mape_v, mape_support) = mape(y, yhat)?;
    Ok(MetricsReport {
        mae: mae(y, yhat)?,
        rmse: rmse(y, yhat)?,
        mape: mape_v,
        r2: r2v,
        adjusted_r2: adjusted_r2(r2v, y.len(), p)?,
        n: y.len(),
        p,
        mape_support,
    })
}

pub const CSV_HEADER: [&str; 8] = ["model", "case", "fold", "mae", "rmse", "mape", "r2", "adjusted_r2"];

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// One row under [`CSV_HEADER`]; `fold` is empty for held-out results.
    pub fn csv_row(&self, model: &str, case: &str, fold: Option<usize>) -> Vec<String> {
        vec![
            model.to_string(),
            case.to_string(),
            fold.map(|f| f.to_string()).unwrap_or_default(),
            self.mae.to_string(),
            self.rmse.to_string(),
            self.mape.to_string(),
            self.r2.to_string(),
            self.adjusted_r2.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
}

/// One seeded shuffle, then `k` contiguous validation blocks whose sizes
/// differ by at most one.
pub fn kfold<T: Clone>(ids: &[T], k: usize, seed: u64) -> Result<Vec<Fold<T>>, EvalError> {
    let n = ids.len();
    if k < 2 || n < k {
        return Err(EvalError::TooFewIds { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let validation = order[start..start + len].iter().map(|&i| ids[i].clone()).collect();
        let train = order[..start].iter().chain(&order[start + len..]).map(|&i| ids[i].clone()).collect();
        folds.push(Fold { train, validation });
        start += len;
    }
    Ok(folds)
}
