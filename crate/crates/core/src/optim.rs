//! Adam with bias correction, shared by the graph-convolutional model and
//! the dense baseline.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First and second moment estimates for one parameter tensor.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdamMoments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamMoments {
    pub fn zeros(len: usize) -> Self {
        AdamMoments { m: vec![0.0; len], v: vec![0.0; len] }
    }
}

/// One Adam update at step `t` (1-based).
pub fn adam_step(config: &AdamConfig, moments: &mut AdamMoments, params: &mut [f64], grads: &[f64], t: u64) {
    assert!(t >= 1, "adam step counter starts at 1");
    assert_eq!(params.len(), grads.len());
    if moments.m.len() != params.len() {
        *moments = AdamMoments::zeros(params.len());
    }
    let bc1 = 1.0 - config.beta1.powi(t as i32);
    let bc2 = 1.0 - config.beta2.powi(t as i32);
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut moments.m).zip(&mut moments.v) {
        *m = config.beta1 * *m + (1.0 - config.beta1) * g;
        *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    }
}

/// Adam state over a fixed list of parameter tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub config: AdamConfig,
    pub moments: Vec<AdamMoments>,
    pub t: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, sizes: &[usize]) -> Self {
        Adam { config, moments: sizes.iter().map(|&n| AdamMoments::zeros(n)).collect(), t: 0 }
    }

    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) {
        assert_eq!(params.len(), self.moments.len());
        self.t += 1;
        for ((p, g), m) in params.iter_mut().zip(grads).zip(&mut self.moments) {
            adam_step(&self.config, m, p, g, self.t);
        }
    }
}
