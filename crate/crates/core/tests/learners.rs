mod support;

use catnet::classifiers::{train, ClassifierSpec};
use catnet::metrics::evaluate_model;
use support::*;

#[test]
fn every_default_learner_fits_the_fixture() {
    let (train_set, test) = split(&mini(), 0.75, 8);
    for spec in ClassifierSpec::all_defaults() {
        let model = train(&spec, &train_set).unwrap();
        let row = evaluate_model(&model, &test).unwrap();
        assert!(row.aa >= 0.75, "{}: AA {}", spec.id(), row.aa);
        assert_eq!(model.training_size(), train_set.len());
    }
}

#[test]
fn training_is_deterministic() {
    let data = stratified(&mini(), 600, 9);
    for spec in ClassifierSpec::all_defaults() {
        let a = train(&spec, &data).unwrap();
        let b = train(&spec, &data).unwrap();
        assert_eq!(a.describe(), b.describe(), "{}", spec.id());
        assert_eq!(a.predict_batch(&data).unwrap(), b.predict_batch(&data).unwrap(), "{}", spec.id());
    }
}

#[test]
fn batch_prediction_equals_single_prediction() {
    let (train_set, test) = split(&mini(), 0.5, 10);
    for spec in ClassifierSpec::all_defaults() {
        let model = train(&spec, &train_set).unwrap();
        let batch = model.predict_batch_with(&test, true).unwrap();
        let single: Vec<_> = test.records().iter().map(|r| model.predict(r).unwrap()).collect();
        assert_eq!(batch, single, "{}", spec.id());
    }
}

#[test]
fn saved_models_predict_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (train_set, test) = split(&mini(), 0.5, 12);
    for spec in ClassifierSpec::all_defaults() {
        let model = train(&spec, &train_set).unwrap();
        let path = dir.path().join("m.bin");
        model.save(&path).unwrap();
        let back = catnet::classifiers::TrainedModel::load(&path).unwrap();
        assert_eq!(back.spec(), model.spec());
        assert_eq!(back.predict_batch(&test).unwrap(), model.predict_batch(&test).unwrap(), "{}", spec.id());
    }
}
