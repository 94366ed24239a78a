"""
Multilayer perceptron

Run with:
pytest test_mlp.py
"""

import numpy as np
import pytest
from sklearn.base import clone

from app.exceptions import InvalidParameterError
from app.ml import MultilayerPerceptron


def _numeric_gradient(net, X, Y, coefs, intercepts, params, index, eps=1e-6):
    array = params[index]
    grad = np.zeros_like(array)
    for position in np.ndindex(array.shape):
        original = array[position]
        array[position] = original + eps
        plus = net.loss_and_gradients(X, Y, coefs, intercepts)[0]
        array[position] = original - eps
        minus = net.loss_and_gradients(X, Y, coefs, intercepts)[0]
        array[position] = original
        grad[position] = (plus - minus) / (2 * eps)
    return grad


@pytest.mark.parametrize("activation", ["logistic", "tanh", "relu"])
def test_backpropagation_matches_finite_differences(rng, activation):
    net = MultilayerPerceptron(hidden_layer_sizes=(5,), activation=activation, alpha=0.3)
    X = rng.standard_normal((10, 4))
    Y = np.eye(3)[rng.integers(0, 3, 10)]
    coefs, intercepts = net.initialize(4, 3, rng)

    _, grad_coefs, grad_intercepts = net.loss_and_gradients(X, Y, coefs, intercepts)

    params = coefs + intercepts
    analytic = grad_coefs + grad_intercepts
    for index in range(len(params)):
        numeric = _numeric_gradient(net, X, Y, coefs, intercepts, params, index)
        np.testing.assert_allclose(analytic[index], numeric, rtol=1e-4, atol=1e-7)


def test_two_hidden_layers_gradient(rng):
    net = MultilayerPerceptron(hidden_layer_sizes=(4, 3), activation="tanh", alpha=0.0)
    X = rng.standard_normal((6, 2))
    Y = np.eye(2)[[0, 1, 0, 1, 1, 0]]
    coefs, intercepts = net.initialize(2, 2, rng)

    _, grad_coefs, _ = net.loss_and_gradients(X, Y, coefs, intercepts)

    numeric = _numeric_gradient(net, X, Y, coefs, intercepts, coefs + intercepts, 0)
    np.testing.assert_allclose(grad_coefs[0], numeric, rtol=1e-4, atol=1e-7)


@pytest.fixture
def separable(rng):
    X = np.vstack([rng.standard_normal((30, 3)) - 3.0, rng.standard_normal((30, 3)) + 3.0])
    y = np.array(["low"] * 30 + ["high"] * 30)
    return X, y


@pytest.mark.parametrize("solver", ["adam", "sgd"])
def test_fits_separable_classes(separable, solver):
    X, y = separable
    net = MultilayerPerceptron(hidden_layer_sizes=(8,), solver=solver, max_epochs=200,
                               random_state=0).fit(X, y)
    assert np.mean(net.predict(X) == y) >= 0.95


def test_probabilities_sum_to_one(separable):
    X, y = separable
    net = MultilayerPerceptron(hidden_layer_sizes=(8,), max_epochs=20, random_state=0).fit(X, y)
    probabilities = net.predict_proba(X)
    assert probabilities.shape == (60, 2)
    np.testing.assert_allclose(probabilities.sum(axis=1), 1.0)
    assert list(net.classes_) == ["high", "low"]


def test_training_is_seeded(separable):
    X, y = separable
    first = MultilayerPerceptron(hidden_layer_sizes=(6,), max_epochs=30, random_state=4).fit(X, y)
    second = MultilayerPerceptron(hidden_layer_sizes=(6,), max_epochs=30, random_state=4).fit(X, y)
    for a, b in zip(first.coefs_, second.coefs_):
        np.testing.assert_array_equal(a, b)


def test_early_stopping_halts_before_max_epochs(separable):
    X, y = separable
    net = MultilayerPerceptron(hidden_layer_sizes=(8,), max_epochs=2000, patience=5,
                               random_state=0).fit(X, y)
    assert net.n_epochs_ < 2000
    assert len(net.loss_curve_) == net.n_epochs_


def test_negligible_validation_gains_count_as_stale(separable):
    X, y = separable
    net = MultilayerPerceptron(hidden_layer_sizes=(8,), max_epochs=2000, patience=5,
                               random_state=0).fit(X, y)
    assert net.n_epochs_ < 2000
    best_before = min(net.loss_curve_[:-5])
    assert min(net.loss_curve_[-5:]) >= best_before - net.tol


def test_large_tolerance_stops_after_patience(separable):
    X, y = separable
    net = MultilayerPerceptron(hidden_layer_sizes=(8,), max_epochs=2000, patience=5,
                               tol=10.0, random_state=0).fit(X, y)
    assert net.n_epochs_ == 6


def test_rejects_negative_tolerance(separable):
    with pytest.raises(InvalidParameterError, match="tol"):
        MultilayerPerceptron(tol=-1.0).fit(*separable)


def test_rejects_unknown_activation(separable):
    with pytest.raises(InvalidParameterError, match="activation"):
        MultilayerPerceptron(activation="softplus").fit(*separable)


def test_rejects_single_class(separable):
    X, _ = separable
    with pytest.raises(InvalidParameterError):
        MultilayerPerceptron().fit(X, np.array(["low"] * 60))


def test_clone_keeps_parameters():
    net = MultilayerPerceptron(hidden_layer_sizes=(10, 10), activation="tanh", alpha=0.05, random_state=3)
    copy = clone(net)
    assert copy.get_params() == net.get_params()
    assert not hasattr(copy, "coefs_")
