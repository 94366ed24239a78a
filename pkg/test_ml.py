"""
Classifier families, stratified splitting and grid search

Run with:
pytest test_ml.py
"""

import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions import DegenerateDataError, InvalidParameterError, SchemaMismatchError
from app.features import Dataset, FeatureId, FeatureVector
from app.ml import (
    CvReport,
    CvSpec,
    HyperparameterGrid,
    ModelFamily,
    build_estimator,
    grid_axes,
    grid_cardinality,
    grid_search,
    predict,
    predict_many,
    published_defaults,
    repeated_stratified_kfold,
    train,
)
from app.ml.rules import HYPERPARAMETER_RULES, NumericRange

FAMILIES = list(ModelFamily)


def _dataset(features, labels):
    ids = tuple(FeatureId("msc", f"s{j}", "t") for j in range(features.shape[1]))
    return Dataset(features=features, labels=tuple(labels), feature_ids=ids)


@pytest.fixture
def blobs(rng):
    """Two 2-D Gaussian blobs six standard deviations apart."""
    low = rng.standard_normal((40, 2))
    high = rng.standard_normal((40, 2)) + 6.0
    return _dataset(np.vstack([low, high]), ["low"] * 40 + ["high"] * 40)


@pytest.fixture
def three_blobs(rng):
    centres = np.array([[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]])
    features = np.vstack([rng.standard_normal((20, 2)) + c for c in centres])
    return _dataset(features, ["low"] * 20 + ["medium"] * 20 + ["high"] * 20)


# ============= HYPERPARAMETER RULES =============

def test_published_defaults():
    defaults = published_defaults()
    assert defaults["svm"] == {"kernel": "linear", "C": 1.0, "gamma": 0.001}
    assert defaults["dt"] == {"max_depth": 2, "min_samples_split": 4, "min_samples_leaf": 8}
    assert defaults["rf"] == {"n_estimators": 40, "max_depth": 9, "min_samples_split": 5,
                              "min_samples_leaf": 4}
    assert defaults["mlp"] == {"hidden_layer_sizes": (50,), "activation": "relu", "solver": "adam",
                               "alpha": 0.1}


def test_full_grid_cardinalities_without_enumeration():
    assert grid_cardinality("svm", "full") == 3 * 10000 * 1000
    assert grid_cardinality("dt", "full") == 9 * 9 * 10
    assert grid_cardinality("rf", "full") == 10 * 9 * 9 * 10
    assert grid_cardinality("mlp", "full") == (100 + 100 ** 2 + 100 ** 3) * 3 * 2 * 1000
    assert grid_cardinality("svm") == 3 * 5 * 4


def test_numeric_range_is_lazy_and_exact():
    c_range = NumericRange(0.01, 100.0, 0.01)
    assert len(c_range) == 10000
    assert c_range[0] == 0.01 and c_range[-1] == 100.0 and c_range[99] == 1.0
    assert 1.0 in c_range and 0.015 not in c_range and 100.01 not in c_range
    assert True not in c_range


def test_full_mlp_axis_indexing():
    hidden = grid_axes("mlp", "full")["hidden_layer_sizes"]
    assert hidden[0] == (10,)
    assert hidden[99] == (1000,)
    assert hidden[100] == (10, 10)
    assert hidden[-1] == (1000, 1000, 1000)
    assert (50, 50) in hidden and (55,) not in hidden and (10, 10, 10, 10) not in hidden


def test_validate_rejects_bad_names_and_values():
    with pytest.raises(InvalidParameterError, match="unknown svm hyperparameter"):
        HYPERPARAMETER_RULES.validate("svm", {"degree": 3})
    with pytest.raises(InvalidParameterError, match="outside the search space"):
        HYPERPARAMETER_RULES.validate("svm", {"kernel": "sigmoid"})
    with pytest.raises(InvalidParameterError):
        HYPERPARAMETER_RULES.validate("dt", {"max_depth": 11})
    with pytest.raises(InvalidParameterError):
        HYPERPARAMETER_RULES.validate("mlp", {"activation": "softplus"})
    with pytest.raises(InvalidParameterError, match="unknown model family"):
        HYPERPARAMETER_RULES.validate("knn", {})


def test_grid_rejects_empty_axes_and_out_of_range_values():
    with pytest.raises(InvalidParameterError, match="empty"):
        HyperparameterGrid(ModelFamily.SVM, {"C": []})
    with pytest.raises(InvalidParameterError):
        HyperparameterGrid(ModelFamily.SVM, {"C": [1.0, 1000.0]})
    with pytest.raises(InvalidParameterError, match="C=1000.0"):
        HyperparameterGrid(ModelFamily.SVM, {"C": [0.01, 1000.0, 100.0]})
    with pytest.raises(InvalidParameterError, match="max_depth=50"):
        HyperparameterGrid(ModelFamily.DT, {"max_depth": (2, 50, 10)})
    with pytest.raises(InvalidParameterError):
        HyperparameterGrid(ModelFamily.RF, {})


# ============= TRAIN / PREDICT =============

@pytest.mark.parametrize("family", FAMILIES)
def test_every_family_separates_blobs(blobs, family):
    model = train(family, None, blobs, seed=3)

    accuracy = np.mean(predict_many(model, blobs.features) == blobs.y)

    assert accuracy >= 0.95
    assert set(model.classes) == {"low", "high"}
    assert model.hyperparameters == published_defaults()[family.value]


@pytest.mark.parametrize("family", FAMILIES)
def test_every_family_clears_the_cv_floor_on_blobs(blobs, family):
    report = grid_search(blobs, HyperparameterGrid.single(family), CvSpec(folds=10, repeats=1),
                         seed=0, n_jobs=1)
    assert len(report.fold_accuracies) == 10
    assert report.mean_accuracy >= 0.95


@pytest.mark.parametrize("family", FAMILIES)
def test_default_training_beats_majority_baseline(three_blobs, family):
    model = train(family, None, three_blobs, seed=0)
    accuracy = np.mean(predict_many(model, three_blobs.features) == three_blobs.y)
    assert accuracy >= 1 / 3


def test_train_rejects_single_class(blobs):
    with pytest.raises(DegenerateDataError, match="single class"):
        train("svm", None, blobs.with_labels(["low"] * blobs.n_rows))


def test_train_rejects_invalid_hyperparameters(blobs):
    with pytest.raises(InvalidParameterError):
        train("rf", {"n_estimators": 15}, blobs)


def test_deep_tree_reproduces_training_labels(three_blobs):
    model = train("dt", {"max_depth": 10, "min_samples_split": 2, "min_samples_leaf": 1}, three_blobs)
    for row in (0, 25, 59):
        vector = FeatureVector(values=three_blobs.features[row], feature_ids=three_blobs.feature_ids)
        assert predict(model, vector) == three_blobs.labels[row]


def test_predict_is_repeatable_and_schema_checked(three_blobs):
    model = train("mlp", None, three_blobs, seed=1)
    point = three_blobs.features[7]
    assert predict(model, point) == predict(model, point)
    assert predict(model, point) in model.classes

    with pytest.raises(SchemaMismatchError):
        predict(model, np.zeros(3))
    other = FeatureVector(values=point, feature_ids=(FeatureId("wc", "a", "b"), FeatureId("wc", "b", "a")))
    with pytest.raises(SchemaMismatchError):
        predict(model, other)


def test_single_tree_forest_matches_its_tree(three_blobs):
    X, y = three_blobs.features, three_blobs.y
    forest = build_estimator("rf", None, seed=5, n_samples=X.shape[0], n_features=X.shape[1])
    forest.set_params(n_estimators=1).fit(X, y)

    tree = forest.estimators_[0]
    tree_labels = forest.classes_[tree.predict(X).astype(int)]
    assert np.array_equal(forest.predict(X), tree_labels)


def test_training_is_seeded(three_blobs):
    first = train("rf", None, three_blobs, seed=11)
    second = train("rf", None, three_blobs, seed=11)
    assert np.array_equal(first.estimator.predict_proba(three_blobs.features),
                          second.estimator.predict_proba(three_blobs.features))


# ============= SPLITS =============

def test_repeated_kfold_partitions_each_repeat():
    labels = ["low"] * 17 + ["medium"] * 17 + ["high"] * 16
    splits = repeated_stratified_kfold(labels, k=10, repeats=3, seed=4)

    assert len(splits) == 30
    for repeat in range(3):
        tests = [test for _, test in splits[repeat * 10:(repeat + 1) * 10]]
        union = np.concatenate(tests)
        assert sorted(union.tolist()) == list(range(50))
    for train_idx, test_idx in splits:
        assert not set(train_idx) & set(test_idx)


def test_repeated_kfold_stratifies_exactly():
    labels = np.array(["low"] * 30 + ["medium"] * 10 + ["high"] * 10)
    for _, test in repeated_stratified_kfold(labels, k=10, repeats=3, seed=0):
        counts = {c: int(np.sum(labels[test] == c)) for c in ("low", "medium", "high")}
        assert counts == {"low": 3, "medium": 1, "high": 1}


def test_repeated_kfold_is_seeded():
    labels = ["a", "b"] * 25
    first = repeated_stratified_kfold(labels, seed=9)
    second = repeated_stratified_kfold(labels, seed=9)
    assert all(np.array_equal(a[1], b[1]) for a, b in zip(first, second))


def test_repeated_kfold_reduces_folds(captured_logs):
    labels = ["a"] * 20 + ["b"] * 4
    splits = repeated_stratified_kfold(labels, k=10, repeats=3)
    assert len(splits) == 12
    assert any("reducing folds" in r["message"] for r in captured_logs)


def test_repeated_kfold_needs_two_per_class():
    with pytest.raises(DegenerateDataError):
        repeated_stratified_kfold(["a"] * 10 + ["b"], k=10)
    with pytest.raises(DegenerateDataError):
        repeated_stratified_kfold(["a"] * 10, k=10)


# ============= GRID SEARCH =============

def test_single_point_grid(three_blobs):
    grid = HyperparameterGrid.single("dt", max_depth=5)
    report = grid_search(three_blobs, grid, seed=2, n_jobs=1)

    assert report.n_grid_points == 1
    assert len(report.fold_accuracies) == 30
    assert report.best_hyperparameters["max_depth"] == 5
    assert report.mean_accuracy == pytest.approx(np.mean(report.fold_accuracies), abs=1e-12)


def test_confusion_matrix_rows_count_test_appearances(three_blobs):
    report = grid_search(three_blobs, HyperparameterGrid.single("svm"), seed=0, n_jobs=1)
    assert report.classes == ["high", "low", "medium"]
    # three repeats: every row is tested three times
    assert [sum(row) for row in report.confusion_matrix] == [60, 60, 60]


def test_coarse_svm_grid_on_separable_data(blobs):
    report = grid_search(blobs, HyperparameterGrid.coarse("svm"), CvSpec(folds=5, repeats=1),
                         seed=0, n_jobs=1)
    assert report.n_grid_points == 60
    assert len(report.grid_scores) == 60
    assert report.mean_accuracy >= 0.95


def test_duplicate_axis_value_keeps_winner(rng):
    features = rng.standard_normal((60, 4))
    features[:, 0] += np.repeat([0.0, 1.0, 2.0], 20)
    data = _dataset(features, ["low"] * 20 + ["medium"] * 20 + ["high"] * 20)
    cv = CvSpec(folds=5, repeats=2)

    base = grid_search(data, HyperparameterGrid("svm", {"C": [0.01, 1.0, 100.0]}), cv, seed=1, n_jobs=1)
    padded = grid_search(data, HyperparameterGrid("svm", {"C": [0.01, 1.0, 100.0, 0.01, 1.0, 100.0]}), cv,
                         seed=1, n_jobs=1)
    assert padded.best_hyperparameters == base.best_hyperparameters
    assert padded.mean_accuracy == base.mean_accuracy


def test_winner_ignores_axis_order_when_scores_differ(rng):
    features = rng.standard_normal((60, 4))
    features[:, 0] += np.repeat([0.0, 1.0, 2.0], 20)
    data = _dataset(features, ["low"] * 20 + ["medium"] * 20 + ["high"] * 20)
    cv = CvSpec(folds=5, repeats=2)

    forward = grid_search(data, HyperparameterGrid("svm", {"C": [0.01, 1.0, 100.0]}), cv, seed=1, n_jobs=1)
    backward = grid_search(data, HyperparameterGrid("svm", {"C": [100.0, 1.0, 0.01]}), cv, seed=1, n_jobs=1)

    scores = sorted(s.mean_accuracy for s in forward.grid_scores)
    if scores[-1] > scores[-2]:
        assert forward.best_hyperparameters == backward.best_hyperparameters
    assert forward.mean_accuracy == backward.mean_accuracy


def test_cv_report_validates_mean():
    with pytest.raises(ValidationError):
        CvReport(family="svm", fold_accuracies=[0.5, 1.0], mean_accuracy=0.8, best_hyperparameters={},
                 seed=0, classes=["a", "b"], confusion_matrix=[[1, 0], [0, 1]])
