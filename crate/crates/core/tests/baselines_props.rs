mod common;

use citecast::baselines::{
    fit_baseline, fit_gbt, fit_linear, fit_random_forest, fit_tree, predict_baseline, BaselineConfig, BaselineError,
    DnnConfig, FittedBaseline, GbtConfig, ModelKind, RfConfig, TreeParams,
};
use citecast::seed;
use common::*;
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

fn data(n: usize, m: usize, seed_v: u64) -> (Array2<f64>, Vec<f64>) {
    let mut rng = seed::rng(seed_v);
    let x = Array2::from_shape_simple_fn((n, m), || rng.random_range(0.0..1.0));
    let y = x
        .rows()
        .into_iter()
        .map(|r| (3.0f64 * r[0]).sin() + r[m - 1] * r[m - 1] + 0.05 * rng.random::<f64>())
        .collect();
    (x, y)
}

#[test]
fn dense_network_gradients_match_finite_differences() {
    for s in 0..5 {
        let mut rng = seed::rng(200 + s);
        let x = random_matrix(20, 8, &mut rng);
        let y: Vec<f64> = (0..20).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (model, _) = dnn_model_off_kinks(&x, 8, 16, s);
        let errors = dnn_gradient_errors(&model, &x, &y, None);
        assert!(errors.iter().all(|e| *e < 1e-4), "seed {s}: {errors:?}");
        let mask = Array2::from_shape_simple_fn((20, 16), || if rng.random::<f64>() < 0.25 { 0.0 } else { 1.0 / 0.75 });
        let errors = dnn_gradient_errors(&model, &x, &y, Some(&mask));
        assert!(errors.iter().all(|e| *e < 1e-4), "seed {s} with dropout: {errors:?}");
    }
}

#[test]
fn least_squares_recovers_exact_coefficients() {
    let (x, _) = data(50, 4, 1);
    let w = [1.5, -2.0, 0.25, 4.0];
    let y: Vec<f64> = x.rows().into_iter().map(|r| 0.7 + r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()).collect();
    let model = fit_linear(x.view(), &y, 0.0).unwrap();
    for (a, b) in model.weights.iter().zip(&w) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!((model.bias - 0.7).abs() < 1e-8);
}

#[test]
fn collinear_columns_without_ridge_are_singular() {
    let (mut x, y) = data(30, 3, 2);
    for i in 0..30 {
        x[[i, 2]] = 2.0 * x[[i, 0]];
    }
    assert!(matches!(fit_linear(x.view(), &y, 0.0), Err(BaselineError::Singular)));
    assert!(fit_linear(x.view(), &y, 1e-3).is_ok());
}

#[test]
fn forest_is_independent_of_thread_count() {
    let (x, y) = data(120, 5, 3);
    let cfg = RfConfig { n_estimators: 24, max_depth: 4, min_samples_split: 2 };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = single.install(|| fit_random_forest(x.view(), &y, &cfg, 9));
    let b = many.install(|| fit_random_forest(x.view(), &y, &cfg, 9));
    assert_eq!(a, b);
    assert_ne!(a, fit_random_forest(x.view(), &y, &cfg, 10));
}

#[test]
fn boosting_training_error_never_increases() {
    let (x, y) = data(150, 4, 4);
    let g = fit_gbt(
        x.view(),
        &y,
        &GbtConfig { learning_rate: 0.3, n_estimators: 40, max_depth: 3, min_samples_split: 2 },
        0,
    );
    assert_eq!(g.stage_mse.len(), 41);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    assert!((g.init - mean).abs() < 1e-12);
    for w in g.stage_mse.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
    }
    assert!(g.stage_mse[40] < 0.2 * g.stage_mse[0]);
}

#[test]
fn every_baseline_round_trips_through_disk() {
    let (x, y) = data(80, 6, 5);
    let y: Vec<f64> = y.iter().map(|v| v.abs() * 10.0).collect();
    let config = BaselineConfig {
        rf: RfConfig { n_estimators: 8, ..Default::default() },
        gbt: GbtConfig { n_estimators: 20, learning_rate: 0.1, ..Default::default() },
        dnn: DnnConfig { hidden: 16, epochs: 20, batch_size: 32, ..Default::default() },
        ..Default::default()
    };
    let dir = tempfile::tempdir().unwrap();
    for kind in [ModelKind::Linear, ModelKind::RandomForest, ModelKind::Boosting, ModelKind::Dense] {
        let fitted = fit_baseline(kind, x.view(), &y, &config, 11).unwrap();
        assert_eq!(fitted, fit_baseline(kind, x.view(), &y, &config, 11).unwrap());
        let path = dir.path().join(format!("{kind}.bin"));
        fitted.save(&path).unwrap();
        let loaded = FittedBaseline::load(&path).unwrap();
        let p = predict_baseline(&loaded, x.view()).unwrap();
        assert_eq!(p, predict_baseline(&fitted, x.view()).unwrap());
        assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
    assert!(matches!(fit_baseline(ModelKind::Gcn, x.view(), &y, &config, 0), Err(BaselineError::NotBaseline(_))));
    let negative: Vec<f64> = y.iter().map(|v| -v - 1.0).collect();
    assert!(fit_baseline(ModelKind::Linear, x.view(), &negative, &config, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trees_respect_depth_and_split_limits(
        n in 5usize..120,
        max_depth in 1usize..7,
        min_split in 2usize..20,
        seed_v in any::<u64>(),
    ) {
        let (x, y) = data(n, 3, seed_v);
        let rows: Vec<usize> = (0..n).collect();
        let params = TreeParams { max_depth, min_samples_split: min_split, max_features: None };
        let tree = fit_tree(x.view(), &y, &rows, params, &mut seed::rng(seed_v));
        prop_assert!(tree.max_depth() <= max_depth);
        prop_assert_eq!(tree.nodes[0].n_samples, n);
        for node in &tree.nodes {
            if let Some(s) = node.split {
                prop_assert!(node.n_samples >= min_split);
                prop_assert!(node.depth < max_depth);
                let (l, r) = (&tree.nodes[s.left], &tree.nodes[s.right]);
                prop_assert_eq!(l.n_samples + r.n_samples, node.n_samples);
                prop_assert!(l.n_samples > 0 && r.n_samples > 0);
                prop_assert_eq!(l.depth, node.depth + 1);
            }
        }
        // Leaf values are the means of the rows routed to them.
        let mut sums = vec![(0.0, 0usize); tree.nodes.len()];
        for i in 0..n {
            let row: Vec<f64> = x.row(i).to_vec();
            let mut k = 0;
            while let Some(s) = tree.nodes[k].split {
                k = if row[s.feature] <= s.threshold { s.left } else { s.right };
            }
            sums[k].0 += y[i];
            sums[k].1 += 1;
        }
        for (k, node) in tree.nodes.iter().enumerate() {
            if node.split.is_none() {
                prop_assert_eq!(sums[k].1, node.n_samples);
                prop_assert!((sums[k].0 / sums[k].1 as f64 - node.value).abs() < 1e-9);
            }
        }
    }
}
