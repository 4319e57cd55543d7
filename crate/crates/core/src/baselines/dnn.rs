use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::optim::{Adam, AdamConfig};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DnnConfig {
    pub hidden: usize,
    pub dropout_rate: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for DnnConfig {
    fn default() -> Self {
        DnnConfig { hidden: 512, dropout_rate: 0.2, batch_size: 256, learning_rate: 0.001, epochs: 200 }
    }
}

/// One hidden ReLU layer and a linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnnModel {
    /// `inputs x hidden`
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array1<f64>,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DnnGradients {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array1<f64>,
    pub b2: f64,
}

fn fan_in_uniform(fan_in: usize) -> Uniform<f64> {
    let b = 1.0 / (fan_in.max(1) as f64).sqrt();
    Uniform::new_inclusive(-b, b).expect("finite bound")
}

impl DnnModel {
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let u1 = fan_in_uniform(inputs);
        let w1 = Array2::from_shape_simple_fn((inputs, hidden), || u1.sample(&mut rng));
        let u2 = fan_in_uniform(hidden);
        let w2 = Array1::from_shape_simple_fn(hidden, || u2.sample(&mut rng));
        DnnModel { w1, b1: Array1::zeros(hidden), w2, b2: 0.0 }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Array1<f64> {
        let h = (x.dot(&self.w1) + &self.b1).mapv(|v| v.max(0.0));
        h.dot(&self.w2) + self.b2
    }

    /// Batch MSE and its exact gradients. `dropout` holds inverted-dropout
    /// multipliers for the hidden layer.
    pub fn loss_and_gradients(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[f64],
        dropout: Option<&Array2<f64>>,
    ) -> (f64, DnnGradients) {
        let n = x.nrows();
        let z = x.dot(&self.w1) + &self.b1;
        let mut h = z.mapv(|v| v.max(0.0));
        if let Some(m) = dropout {
            h *= m;
        }
        let out = h.dot(&self.w2) + self.b2;
        let resid: Array1<f64> = out.iter().zip(y).map(|(o, t)| o - t).collect();
        let loss = resid.iter().map(|r| r * r).sum::<f64>() / n as f64;
        let d_out = resid * (2.0 / n as f64);

        let b2 = d_out.sum();
        let w2 = h.t().dot(&d_out);
        let mut d_z = Array2::<f64>::zeros(z.raw_dim());
        Zip::indexed(&mut d_z).and(&z).for_each(|(i, j), d, &zv| {
            if zv > 0.0 {
                *d = d_out[i] * self.w2[j];
            }
        });
        if let Some(m) = dropout {
            d_z *= m;
        }
        let b1 = d_z.sum_axis(Axis(0));
        let w1 = x.t().dot(&d_z);
        (loss, DnnGradients { w1, b1, w2, b2 })
    }
}

/// Mini-batch Adam training. Returns the model and the per-epoch mean
/// training loss.
pub fn fit_dnn(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    config: &DnnConfig,
    seed: u64,
) -> Result<(DnnModel, Vec<f64>), BaselineError> {
    let (n, m) = x.dim();
    if n == 0 || y.len() != n {
        return Err(BaselineError::Shape(format!("{n} rows vs {} targets", y.len())));
    }
    let mut model = DnnModel::init(m, config.hidden, seed::derive(seed, 0));
    let mut rng = seed::stream_rng(seed, 1);
    let adam_cfg = AdamConfig { learning_rate: config.learning_rate, ..Default::default() };
    let mut adam = Adam::new(adam_cfg, &[model.w1.len(), model.b1.len(), model.w2.len(), 1]);
    let keep = 1.0 / (1.0 - config.dropout_rate);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<f64> = batch.iter().map(|&i| y[i]).collect();
            let mask = (config.dropout_rate > 0.0).then(|| {
                Array2::from_shape_simple_fn((batch.len(), config.hidden), || {
                    if rng.random::<f64>() < config.dropout_rate {
                        0.0
                    } else {
                        keep
                    }
                })
            });
            let (loss, g) = model.loss_and_gradients(xb.view(), &yb, mask.as_ref());
            if !loss.is_finite() {
                return Err(BaselineError::Diverged { epoch });
            }
            total += loss * batch.len() as f64;
            let mut b2 = [model.b2];
            adam.step(
                &mut [
                    model.w1.as_slice_mut().expect("contiguous"),
                    model.b1.as_slice_mut().expect("contiguous"),
                    model.w2.as_slice_mut().expect("contiguous"),
                    &mut b2,
                ],
                &[
                    g.w1.as_slice().expect("contiguous"),
                    g.b1.as_slice().expect("contiguous"),
                    g.w2.as_slice().expect("contiguous"),
                    &[g.b2],
                ],
            );
            model.b2 = b2[0];
        }
        history.push(total / n as f64);
    }
    Ok((model, history))
}
