//! Independent reference implementations used by the integration tests.
//! Everything here is written with plain loops so it shares no code path
//! with the library.
#![allow(dead_code)]

use citecast::baselines::DnnModel;
use citecast::corpus::{PaperId, PaperRecord};
use citecast::gcn::GcnModel;
use citecast::topics::DocTopics;
use rand::Rng;

pub const FD_STEP: f64 = 1e-5;

/// Central finite differences of `f` at `theta`.
pub fn fd_gradient(theta: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + FD_STEP;
            let up = f(&p);
            p[i] = orig - FD_STEP;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// `‖a - b‖ / max(‖a‖, ‖b‖)`, 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied()).max(norm(&mut b.iter().copied()));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

pub fn to_array(m: &[Vec<f64>]) -> ndarray::Array2<f64> {
    let cols = m.first().map_or(0, Vec::len);
    ndarray::Array2::from_shape_fn((m.len(), cols), |(i, j)| m[i][j])
}

pub fn dense_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = 0.0;
                    for k in 0..inner {
                        s += row[k] * b[k][j];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// `D^-1/2 (sym(A) + I) D^-1/2` built densely from directed index edges.
pub fn dense_renormalized(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for &(i, j) in edges {
        m[i][j] = 1.0;
        m[j][i] = 1.0;
    }
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let deg: Vec<f64> = m.iter().map(|r| r.iter().sum()).collect();
    (0..n).map(|i| (0..n).map(|j| m[i][j] / (deg[i].sqrt() * deg[j].sqrt())).collect()).collect()
}

/// Directed edges of an Erdős–Rényi style graph without self-loops.
pub fn random_edges(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Two-layer perceptron with the GCN's weights, evaluated row by row.
pub fn mlp_oracle(x: &[Vec<f64>], model: &GcnModel) -> Vec<f64> {
    x.iter()
        .map(|row| {
            let h1: Vec<f64> = (0..model.dims.hidden)
                .map(|j| (0..row.len()).map(|k| row[k] * model.w0[[k, j]]).sum::<f64>().max(0.0))
                .collect();
            let h2: Vec<f64> = (0..model.dims.hidden2)
                .map(|j| (0..h1.len()).map(|k| h1[k] * model.w1[[k, j]]).sum::<f64>().max(0.0))
                .collect();
            h2.iter().zip(&model.w_out).map(|(h, w)| h * w).sum::<f64>() + model.bias
        })
        .collect()
}

pub fn gcn_params(model: &GcnModel) -> Vec<Vec<f64>> {
    vec![model.w0.iter().copied().collect(), model.w1.iter().copied().collect(), model.w_out.to_vec(), vec![model.bias]]
}

/// Copy of `model` with tensor `which` replaced by `values` (row-major).
pub fn gcn_with(model: &GcnModel, which: usize, values: &[f64]) -> GcnModel {
    let mut m = model.clone();
    match which {
        0 => m.w0.iter_mut().zip(values).for_each(|(w, v)| *w = *v),
        1 => m.w1.iter_mut().zip(values).for_each(|(w, v)| *w = *v),
        2 => m.w_out.iter_mut().zip(values).for_each(|(w, v)| *w = *v),
        _ => m.bias = values[0],
    }
    m
}

pub fn dnn_params(model: &DnnModel) -> Vec<Vec<f64>> {
    vec![model.w1.iter().copied().collect(), model.b1.to_vec(), model.w2.to_vec(), vec![model.b2]]
}

pub fn dnn_with(model: &DnnModel, which: usize, values: &[f64]) -> DnnModel {
    let mut m = model.clone();
    match which {
        0 => m.w1.iter_mut().zip(values).for_each(|(w, v)| *w = *v),
        1 => m.b1.iter_mut().zip(values).for_each(|(w, v)| *w = *v),
        2 => m.w2.iter_mut().zip(values).for_each(|(w, v)| *w = *v),
        _ => m.b2 = values[0],
    }
    m
}

/// Largest `h` such that at least `h` entries are `>= h`, by trying every
/// candidate.
pub fn naive_h_index(counts: &[usize]) -> usize {
    let mut best = 0;
    for h in 0..=counts.len() {
        if counts.iter().filter(|&&c| c >= h).count() >= h {
            best = h;
        }
    }
    best
}

pub fn naive_mae(y: &[f64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        s += (y[i] - p[i]).abs();
    }
    s / y.len() as f64
}

pub fn naive_rmse(y: &[f64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        s += (y[i] - p[i]) * (y[i] - p[i]);
    }
    (s / y.len() as f64).sqrt()
}

pub fn naive_mape(y: &[f64], p: &[f64]) -> f64 {
    let (mut s, mut n) = (0.0, 0);
    for i in 0..y.len() {
        if y[i] != 0.0 {
            s += ((y[i] - p[i]) / y[i]).abs();
            n += 1;
        }
    }
    s / n as f64
}

pub fn naive_r2(y: &[f64], p: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..y.len() {
        ss_res += (y[i] - p[i]) * (y[i] - p[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    1.0 - ss_res / ss_tot
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Random connected-ish problem: `n` nodes, `m` features, targets and a
/// training mask covering about half the nodes.
pub struct GcnProblem {
    pub adj: citecast::graph::NormalizedAdjacency,
    pub edges: Vec<(usize, usize)>,
    pub x: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub mask: Vec<usize>,
}

pub fn gcn_problem(n: usize, m: usize, seed: u64) -> GcnProblem {
    let mut rng = citecast::seed::rng(seed);
    let edges = random_edges(n, 0.15, &mut rng);
    let adj = citecast::graph::normalized_adjacency_from_edges(n, edges.iter().copied());
    let x = random_matrix(n, m, &mut rng);
    let targets = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mask = (0..n).filter(|_| rng.random::<bool>()).chain([0]).collect();
    GcnProblem { adj, edges, x, targets, mask }
}

/// Relative error between analytic and finite-difference gradients for
/// each of the four GCN tensors.
pub fn gcn_gradient_errors(
    problem: &GcnProblem,
    model: &GcnModel,
    masks: Option<citecast::gcn::DropoutMasks>,
) -> Vec<f64> {
    use citecast::gcn::{backward, forward, loss};
    let x = to_array(&problem.x);
    let loss_of = |m: &GcnModel| {
        let cache = forward(m, &problem.adj, x.view(), masks.clone()).unwrap();
        loss(cache.output.as_slice().unwrap(), &problem.targets, &problem.mask).unwrap()
    };
    let cache = forward(model, &problem.adj, x.view(), masks.clone()).unwrap();
    let g = backward(model, &problem.adj, &cache, &problem.targets, &problem.mask).unwrap();
    let analytic =
        [g.w0.iter().copied().collect::<Vec<_>>(), g.w1.iter().copied().collect(), g.w_out.to_vec(), vec![g.bias]];
    gcn_params(model)
        .iter()
        .enumerate()
        .map(|(t, theta)| {
            let numeric = fd_gradient(theta, |p| loss_of(&gcn_with(model, t, p)));
            relative_error(&analytic[t], &numeric)
        })
        .collect()
}

/// Same check for the dense baseline network.
pub fn dnn_gradient_errors(
    model: &DnnModel,
    x: &[Vec<f64>],
    y: &[f64],
    dropout: Option<&ndarray::Array2<f64>>,
) -> Vec<f64> {
    let xa = to_array(x);
    let (_, g) = model.loss_and_gradients(xa.view(), y, dropout);
    let analytic = [g.w1.iter().copied().collect::<Vec<_>>(), g.b1.to_vec(), g.w2.to_vec(), vec![g.b2]];
    dnn_params(model)
        .iter()
        .enumerate()
        .map(|(t, theta)| {
            let numeric = fd_gradient(theta, |p| dnn_with(model, t, p).loss_and_gradients(xa.view(), y, dropout).0);
            relative_error(&analytic[t], &numeric)
        })
        .collect()
}

/// Pre-activations closer to zero than this make central differences
/// straddle a ReLU kink, where the loss is not differentiable.
pub const KINK_MARGIN: f64 = 1e-4;

/// Smallest `|z|` over both GCN pre-activation layers.
pub fn gcn_kink_distance(problem: &GcnProblem, model: &GcnModel) -> f64 {
    let c = citecast::gcn::forward(model, &problem.adj, to_array(&problem.x).view(), None).unwrap();
    c.z1.iter().chain(&c.z2).map(|v| v.abs()).fold(f64::INFINITY, f64::min)
}

/// First model drawn from `seed, seed + 1000, ...` whose pre-activations all
/// clear [`KINK_MARGIN`]. Returns the model and how many draws were skipped.
pub fn gcn_model_off_kinks(problem: &GcnProblem, dims: citecast::gcn::GcnDims, seed: u64) -> (GcnModel, usize) {
    for redraw in 0..100 {
        let model = GcnModel::init(dims, seed + 1000 * redraw as u64).unwrap();
        if gcn_kink_distance(problem, &model) > KINK_MARGIN {
            return (model, redraw);
        }
    }
    panic!("no kink-free weights for seed {seed}");
}

pub fn dnn_model_off_kinks(x: &[Vec<f64>], inputs: usize, hidden: usize, seed: u64) -> (DnnModel, usize) {
    let xa = to_array(x);
    for redraw in 0..100 {
        let mut model = DnnModel::init(inputs, hidden, seed + 1000 * redraw as u64);
        model.b1.iter_mut().enumerate().for_each(|(i, b)| *b = 0.05 * (i as f64 % 3.0 - 1.0));
        let z = xa.dot(&model.w1) + &model.b1;
        if z.iter().all(|v| v.abs() > KINK_MARGIN) {
            return (model, redraw);
        }
    }
    panic!("no kink-free weights for seed {seed}");
}

/// Planted synthetic corpus, cleaned into a cache the way `ingest` would.
pub fn planted_cache(seed: u64) -> citecast::corpus::CorpusCache {
    use citecast::corpus::{clean, CleanConfig, CorpusCache};
    use citecast::synth::{generate, FutureMode, SynthConfig};
    let cfg = SynthConfig {
        num_papers: 2000,
        future: FutureMode::Planted { max_rate: 30.0, hops: 2 },
        noise: 0.1,
        seed,
        ..Default::default()
    };
    let corpus = generate(&cfg).unwrap();
    let (records, report) = clean(corpus.records, &CleanConfig::default());
    CorpusCache { records, report, diagnostics: Vec::new() }
}

/// One-year case with a small topic model and light baselines.
pub fn experiment(seed: u64, models: &[citecast::baselines::ModelKind]) -> citecast::pipeline::ExperimentConfig {
    let mut config = citecast::pipeline::ExperimentConfig { models: models.to_vec(), seed, ..Default::default() };
    config.lda.num_topics = 5;
    config.lda.iterations = 50;
    config.baselines.rf.n_estimators = 10;
    config.baselines.gbt.n_estimators = 20;
    config.baselines.dnn.epochs = 20;
    config
}

pub const AUTHORS: [&str; 6] = ["Ada", "Bo", "Cy", "Di", "Ed", "Flo"];

pub fn random_corpus(n: u64, rng: &mut impl Rng) -> Vec<PaperRecord> {
    (0..n)
        .map(|i| {
            let refs: Vec<u64> = (0..n + 3).filter(|&j| j != i && rng.random::<f64>() < 0.25).collect();
            let k = rng.random_range(1..4);
            let authors: Vec<&str> = (0..k).map(|_| AUTHORS[rng.random_range(0..AUTHORS.len())]).collect();
            PaperRecord::new(i, rng.random_range(2000..2006))
                .with_authors(authors)
                .with_venue(if i % 2 == 0 { "Journal A" } else { "Proc. B" })
                .with_references(refs)
        })
        .collect()
}

pub fn random_simplex(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k).map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() }).collect();
    if v.iter().all(|x| *x == 0.0) {
        v[rng.random_range(0..k)] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Citations of `id` among records visible at `cutoff`, counted from the raw
/// reference lists.
pub fn brute_cited_by(records: &[PaperRecord], cutoff: i32, id: PaperId) -> usize {
    if !records.iter().any(|r| r.id == id && r.year <= cutoff) {
        return 0;
    }
    records.iter().filter(|r| r.year <= cutoff && r.references.contains(&id)).count()
}

pub const WORDS_PER_TOPIC: usize = 20;

/// Documents of 60 tokens: 90% from the planted topic's own vocabulary,
/// the rest uniform over all words.
pub fn planted_docs(per_topic: usize, seed_v: u64) -> (Vec<(PaperId, Vec<String>)>, Vec<usize>) {
    let mut rng = citecast::seed::rng(seed_v);
    let mut docs = Vec::new();
    let mut truth = Vec::new();
    for d in 0..3 * per_topic {
        let topic = d % 3;
        let tokens = (0..60)
            .map(|_| {
                let (t, w) = if rng.random::<f64>() < 0.9 {
                    (topic, rng.random_range(0..WORDS_PER_TOPIC))
                } else {
                    (rng.random_range(0..3), rng.random_range(0..WORDS_PER_TOPIC))
                };
                format!("t{t}w{w}")
            })
            .collect();
        docs.push((PaperId(d as u64), tokens));
        truth.push(topic);
    }
    (docs, truth)
}

/// Share of documents putting at least `mass` on their planted topic under
/// the best of the six topic relabellings.
pub fn matched_recovery(topics: &DocTopics, docs: &[(PaperId, Vec<String>)], truth: &[usize], mass: f64) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|perm| {
            let hits =
                docs.iter().zip(truth).filter(|((id, _), t)| topics.get(*id).unwrap()[perm[**t]] >= mass).count();
            hits as f64 / docs.len() as f64
        })
        .fold(0.0, f64::max)
}
