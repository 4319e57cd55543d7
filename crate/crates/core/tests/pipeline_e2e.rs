mod common;

use std::fs;

use citecast::baselines::ModelKind;
use citecast::features::leaking_columns;
use citecast::pipeline::{
    evaluate_model, load_artifact, model_file, prepare_case, read_metrics_csv, run_experiment, write_experiment,
    ErrorClass, ExperimentConfig, Stage,
};
use common::*;

#[test]
fn every_model_runs_and_writes_its_report() {
    let cache = planted_cache(7);
    let config = experiment(7, &ModelKind::ALL);
    let result = run_experiment(&cache, &config, None).unwrap();
    let p = &result.prepared;
    assert_eq!(result.outcomes.len(), 5);
    assert!(p.train_rows.iter().all(|r| !p.test_rows.contains(r)));
    assert_eq!(p.train_rows.len() + p.test_rows.len(), p.split.train_ids.len() + p.split.test_ids.len());
    for o in &result.outcomes {
        assert_eq!(o.predictions.len(), p.test_rows.len());
        assert!(o.report.mae.is_finite() && o.report.r2.is_finite(), "{}: {:?}", o.kind, o.report);
    }

    let dir = tempfile::tempdir().unwrap();
    write_experiment(&result, dir.path()).unwrap();
    for name in ["metrics.csv", "metrics.json", "predictions.csv", "features.csv", "norm_stats.json", "gcn_loss.csv"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let rows = read_metrics_csv(fs::File::open(dir.path().join("metrics.csv")).unwrap(), "metrics.csv").unwrap();
    let models: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(models, ["LR", "RF", "XGBoost", "DNN", "GCN"]);
    assert!(rows.iter().all(|r| r.case == "1yr" && r.fold.is_none()));

    // Saved models score exactly as they did in memory.
    for o in &result.outcomes {
        let loaded = load_artifact(o.kind, model_file(dir.path(), o.kind)).unwrap();
        let (report, predictions) = evaluate_model(p, &loaded, &p.test_rows).unwrap();
        assert_eq!(report, o.report);
        assert_eq!(predictions, o.predictions);
    }
}

#[test]
fn runs_are_reproducible_byte_for_byte() {
    let cache = planted_cache(3);
    let config = experiment(3, &[ModelKind::Linear, ModelKind::Dense, ModelKind::Gcn]);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_experiment(&run_experiment(&cache, &config, None).unwrap(), d.path()).unwrap();
    }
    for name in ["metrics.csv", "predictions.csv", "features.csv"] {
        assert_eq!(
            fs::read(dirs[0].path().join(name)).unwrap(),
            fs::read(dirs[1].path().join(name)).unwrap(),
            "{name} differs"
        );
    }
    let other = ExperimentConfig { seed: 4, ..config };
    let alt = tempfile::tempdir().unwrap();
    write_experiment(&run_experiment(&cache, &other, None).unwrap(), alt.path()).unwrap();
    assert_ne!(
        fs::read(dirs[0].path().join("metrics.csv")).unwrap(),
        fs::read(alt.path().join("metrics.csv")).unwrap()
    );
}

#[test]
fn cross_validation_stays_inside_the_training_rows() {
    let cache = planted_cache(5);
    let config = ExperimentConfig { cv_folds: 3, ..experiment(5, &[ModelKind::Linear]) };
    let result = run_experiment(&cache, &config, None).unwrap();
    assert_eq!(result.outcomes[0].cv.len(), 3);
    let dir = tempfile::tempdir().unwrap();
    write_experiment(&result, dir.path()).unwrap();
    let rows = read_metrics_csv(fs::File::open(dir.path().join("cv_metrics.csv")).unwrap(), "cv").unwrap();
    assert_eq!(rows.iter().map(|r| r.fold).collect::<Vec<_>>(), [Some(0), Some(1), Some(2)]);
}

#[test]
fn leak_canary_flags_a_target_derived_column() {
    let cache = planted_cache(2);
    let config = experiment(2, &[ModelKind::Linear]);
    let p = prepare_case(&cache, &config, None).unwrap();
    let y = p.targets_at(&p.train_rows);
    assert!(leaking_columns(&p.features, &p.train_rows, &y, config.leak_threshold).is_empty());

    let mut leaky = p.features.clone();
    let (n, m) = (leaky.n_rows(), leaky.n_cols());
    let mut values = ndarray::Array2::zeros((n, m + 1));
    values.slice_mut(ndarray::s![.., ..m]).assign(&leaky.values);
    for r in 0..n {
        values[[r, m]] = 0.5 * p.targets[r] + 1.0;
    }
    leaky.values = values;
    leaky.columns.push("future_citations".into());
    let found = leaking_columns(&leaky, &p.train_rows, &y, config.leak_threshold);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].0, "future_citations");

    // A zero threshold turns any correlated column into a hard failure.
    let err = prepare_case(&cache, &ExperimentConfig { leak_threshold: 0.0, ..config }, None).unwrap_err();
    assert_eq!((err.stage, err.class), (Stage::Features, ErrorClass::Data));
}

#[test]
fn bad_configs_are_configuration_errors() {
    for text in [
        r#"{"modles": ["GCN"]}"#,
        r#"{"models": []}"#,
        r#"{"case": "custom"}"#,
        r#"{"cv_folds": 1}"#,
        r#"{"gcn": {"epochs": 0}}"#,
    ] {
        let err = ExperimentConfig::from_json(text).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{text}: {err}");
    }
    let ok = ExperimentConfig::from_json(
        r#"{"case": "custom", "window": [2005, 2008], "horizon_years": 2, "models": ["LR", "GCN"]}"#,
    )
    .unwrap();
    assert_eq!(ok.models, [ModelKind::Linear, ModelKind::Gcn]);
}

#[test]
fn corpus_too_short_for_the_case_is_a_data_error() {
    let cache = planted_cache(1);
    let config = ExperimentConfig { case: citecast::corpus::CaseLabel::TenYear, ..experiment(1, &[ModelKind::Linear]) };
    let err = run_experiment(&cache, &config, None).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}
