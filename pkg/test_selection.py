"""
Forward selection and recursive elimination

Run with:
pytest test_selection.py
"""

import numpy as np
import pytest

from app.exceptions import DegenerateDataError, InvalidParameterError
from app.features import (
    Dataset,
    FeatureId,
    cv_scorer,
    forward_feature_selection,
    linear_importance,
    recursive_feature_elimination,
)

CLASSES = ("low", "medium", "high")


def _dataset(features, classes):
    ids = tuple(FeatureId("pdc", f"s{j}", "t") for j in range(features.shape[1]))
    return Dataset(features=features, labels=tuple(CLASSES[c] for c in classes), feature_ids=ids)


def _one_informative(rng, n_per_class=15, n_features=8, informative=3):
    classes = np.repeat(np.arange(3), n_per_class)
    features = rng.standard_normal((classes.size, n_features))
    features[:, informative] = classes
    return _dataset(features, classes)


def _shifted_means(rng, n_per_class=20, n_features=784, n_informative=10, shift=2.0):
    classes = np.repeat(np.arange(3), n_per_class)
    features = rng.standard_normal((classes.size, n_features))
    features[:, :n_informative] += shift * classes[:, None]
    return _dataset(features, classes)


# ============= FORWARD SELECTION =============

def test_ffs_picks_the_class_feature_first(rng):
    data = _one_informative(rng)
    selected = forward_feature_selection(data, k=2, tol=None)
    assert selected[0] == 3
    assert len(selected) == 2


def test_ffs_with_k_equal_to_feature_count_returns_everything(rng):
    data = _one_informative(rng, n_features=5, informative=0)
    selected = forward_feature_selection(data, k=5, tol=None)
    assert sorted(selected) == list(range(5))


def test_ffs_stops_when_score_saturates(rng):
    data = _one_informative(rng)
    selected = forward_feature_selection(data, k=6)
    assert 1 <= len(selected) < 6
    assert selected[0] == 3


def test_ffs_ties_go_to_lowest_index(rng):
    data = _one_informative(rng, n_features=6)
    constant_scorer = lambda X, y: 0.5  # noqa: E731
    assert forward_feature_selection(data, k=3, scorer=constant_scorer, tol=None) == [0, 1, 2]


def test_ffs_is_deterministic_and_duplicate_free(rng):
    data = _shifted_means(rng, n_per_class=10, n_features=12, n_informative=3, shift=1.0)
    scorer = cv_scorer(seed=42)
    first = forward_feature_selection(data, k=4, scorer=scorer, tol=None)
    second = forward_feature_selection(data, k=4, scorer=scorer, tol=None, n_jobs=2)
    assert first == second
    assert len(set(first)) == len(first)
    assert all(0 <= j < data.n_features for j in first)


def test_ffs_rejects_single_class_and_bad_k(rng):
    data = _one_informative(rng)
    with pytest.raises(DegenerateDataError):
        forward_feature_selection(data.with_labels(["low"] * data.n_rows), k=1)
    with pytest.raises(InvalidParameterError):
        forward_feature_selection(data, k=data.n_features + 1)


# ============= RECURSIVE ELIMINATION =============

def test_rfe_with_k_equal_to_feature_count_is_identity(rng):
    data = _one_informative(rng)
    assert recursive_feature_elimination(data, k=data.n_features) == list(range(data.n_features))


def test_rfe_down_to_one_keeps_the_informative_feature(rng):
    data = _one_informative(rng, n_per_class=20, n_features=20, informative=5)
    assert recursive_feature_elimination(data, k=1) == [5]


def test_rfe_ties_remove_higher_index(rng):
    data = _one_informative(rng, n_features=5)
    flat = lambda X, y: np.ones(X.shape[1])  # noqa: E731
    assert recursive_feature_elimination(data, k=2, ranker=flat) == [0, 1]


def test_rfe_rejects_bad_ranker(rng):
    data = _one_informative(rng, n_features=5)
    with pytest.raises(InvalidParameterError, match="one importance per feature"):
        recursive_feature_elimination(data, k=2, ranker=lambda X, y: np.ones(2))


def test_linear_importance_favours_informative_columns(rng):
    data = _shifted_means(rng, n_features=30, n_informative=3)
    importance = linear_importance(seed=0)(data.features, data.y)
    assert set(np.argsort(importance)[-3:]) == {0, 1, 2}


@pytest.mark.parametrize("seed", range(5))
def test_linear_importance_ignores_noise_for_a_middle_class(seed):
    data = _shifted_means(np.random.default_rng(seed), n_features=30, n_informative=3)
    importance = linear_importance(seed=seed)(data.features, data.y)
    assert importance[:3].min() > importance[3:].max()


@pytest.mark.slow
def test_rfe_keeps_informative_features_of_a_full_montage(rng):
    data = _shifted_means(rng)

    selected = recursive_feature_elimination(data, k=100)

    assert len(selected) == 100
    assert selected == sorted(set(selected))
    assert len(set(range(10)) & set(selected)) >= 9


@pytest.mark.slow
def test_ffs_finds_informative_features_of_a_full_montage(rng):
    data = _shifted_means(rng)

    selected = forward_feature_selection(data, k=10, tol=None, n_jobs=-1)

    assert len(selected) == 10
    assert len(set(range(10)) & set(selected)) >= 8


def test_rfe_is_deterministic(rng):
    data = _shifted_means(rng, n_per_class=10, n_features=40, n_informative=4)
    assert recursive_feature_elimination(data, k=10) == recursive_feature_elimination(data, k=10)
