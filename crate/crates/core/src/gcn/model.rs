use ndarray::{Array1, Array2, ArrayView2, Zip};
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::GcnError;
use crate::graph::{spmm, NormalizedAdjacency};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcnDims {
    pub input: usize,
    pub hidden: usize,
    pub hidden2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnModel {
    pub dims: GcnDims,
    /// `input x hidden`
    pub w0: Array2<f64>,
    /// `hidden x hidden2`
    pub w1: Array2<f64>,
    /// Linear head, length `hidden2`.
    pub w_out: Array1<f64>,
    pub bias: f64,
    pub seed: u64,
}

fn uniform_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    let bound = 1.0 / (rows as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

impl GcnModel {
    /// Weights uniform in `±1/sqrt(fan_in)`, bias zero.
    pub fn init(dims: GcnDims, seed: u64) -> Result<Self, GcnError> {
        if dims.input == 0 || dims.hidden == 0 || dims.hidden2 == 0 {
            return Err(GcnError::Shape(format!("dimensions must be positive: {dims:?}")));
        }
        let mut rng = seed::rng(seed);
        let w0 = uniform_matrix(dims.input, dims.hidden, &mut rng);
        let w1 = uniform_matrix(dims.hidden, dims.hidden2, &mut rng);
        let w_out = uniform_matrix(dims.hidden2, 1, &mut rng).column(0).to_owned();
        Ok(GcnModel { dims, w0, w1, w_out, bias: 0.0, seed })
    }

    pub fn is_finite(&self) -> bool {
        self.w0.iter().chain(&self.w1).chain(&self.w_out).all(|v| v.is_finite()) && self.bias.is_finite()
    }
}

/// Inverted-dropout multipliers for both hidden layers: kept units carry
/// `1/(1-rate)`, dropped ones 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks {
    pub h1: Array2<f64>,
    pub h2: Array2<f64>,
}

impl DropoutMasks {
    pub fn sample(rate: f64, n: usize, dims: GcnDims, rng: &mut impl Rng) -> Self {
        let keep = 1.0 / (1.0 - rate);
        let mut draw =
            |cols| Array2::from_shape_simple_fn((n, cols), || if rng.random::<f64>() < rate { 0.0 } else { keep });
        let h1 = draw(dims.hidden);
        let h2 = draw(dims.hidden2);
        DropoutMasks { h1, h2 }
    }
}

/// Activations retained for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `Â X`
    pub ax: Array2<f64>,
    pub z1: Array2<f64>,
    /// Post-ReLU, post-dropout first layer.
    pub h1: Array2<f64>,
    pub z2: Array2<f64>,
    /// Post-ReLU, post-dropout second layer.
    pub h2: Array2<f64>,
    pub masks: Option<DropoutMasks>,
    pub output: Array1<f64>,
}

fn relu(z: &Array2<f64>) -> Array2<f64> {
    z.mapv(|v| v.max(0.0))
}

fn check_finite(a: &Array2<f64>, what: &str) -> Result<(), GcnError> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GcnError::NonFinite(what.to_string()))
    }
}

pub(crate) fn forward_from_ax(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    ax: Array2<f64>,
    masks: Option<DropoutMasks>,
) -> Result<ForwardCache, GcnError> {
    let z1 = ax.dot(&model.w0);
    check_finite(&z1, "first graph convolution")?;
    let mut h1 = relu(&z1);
    if let Some(m) = &masks {
        h1 *= &m.h1;
    }
    let z2 = spmm(adj, h1.dot(&model.w1).view())?;
    check_finite(&z2, "second graph convolution")?;
    let mut h2 = relu(&z2);
    if let Some(m) = &masks {
        h2 *= &m.h2;
    }
    let output = h2.dot(&model.w_out) + model.bias;
    if !output.iter().all(|v| v.is_finite()) {
        return Err(GcnError::NonFinite("output head".into()));
    }
    Ok(ForwardCache { ax, z1, h1, z2, h2, masks, output })
}

/// Full-graph forward pass. Pass `masks` only while training.
pub fn forward(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    x: ArrayView2<'_, f64>,
    masks: Option<DropoutMasks>,
) -> Result<ForwardCache, GcnError> {
    if x.ncols() != model.dims.input {
        return Err(GcnError::Shape(format!(
            "feature matrix has {} columns, model expects {}",
            x.ncols(),
            model.dims.input
        )));
    }
    if x.nrows() != adj.len() {
        return Err(GcnError::Shape(format!(
            "feature matrix has {} rows, adjacency is {}x{}",
            x.nrows(),
            adj.len(),
            adj.len()
        )));
    }
    let ax = spmm(adj, x)?;
    forward_from_ax(model, adj, ax, masks)
}

/// Mean squared error over the masked node indices.
pub fn loss(predictions: &[f64], targets: &[f64], mask: &[usize]) -> Result<f64, GcnError> {
    if mask.is_empty() {
        return Err(GcnError::EmptyMask);
    }
    let sum: f64 = mask.iter().map(|&i| (predictions[i] - targets[i]).powi(2)).sum();
    Ok(sum / mask.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnGradients {
    pub w0: Array2<f64>,
    pub w1: Array2<f64>,
    pub w_out: Array1<f64>,
    pub bias: f64,
}

/// Analytic gradients of the masked MSE. Uses `Âᵀ = Â`.
pub fn backward(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    cache: &ForwardCache,
    targets: &[f64],
    mask: &[usize],
) -> Result<GcnGradients, GcnError> {
    if mask.is_empty() {
        return Err(GcnError::EmptyMask);
    }
    let n = cache.output.len();
    let scale = 2.0 / mask.len() as f64;
    let mut d_out = Array1::<f64>::zeros(n);
    for &i in mask {
        d_out[i] += scale * (cache.output[i] - targets[i]);
    }

    let bias = d_out.sum();
    let w_out = cache.h2.t().dot(&d_out);

    // dL/dZ2 = (d_out w_outᵀ) ⊙ dropout ⊙ 1[Z2 > 0]
    let mut d_z2 = Array2::<f64>::zeros(cache.z2.raw_dim());
    Zip::indexed(&mut d_z2).and(&cache.z2).for_each(|(i, j), d, &z| {
        if z > 0.0 {
            *d = d_out[i] * model.w_out[j];
        }
    });
    if let Some(m) = &cache.masks {
        d_z2 *= &m.h2;
    }
    let d_p = spmm(adj, d_z2.view())?;
    let w1 = cache.h1.t().dot(&d_p);

    let mut d_z1 = d_p.dot(&model.w1.t());
    if let Some(m) = &cache.masks {
        d_z1 *= &m.h1;
    }
    Zip::from(&mut d_z1).and(&cache.z1).for_each(|d, &z| {
        if z <= 0.0 {
            *d = 0.0;
        }
    });
    let w0 = cache.ax.t().dot(&d_z1);

    Ok(GcnGradients { w0, w1, w_out, bias })
}
