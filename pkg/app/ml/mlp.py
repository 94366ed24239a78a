"""
Multilayer perceptron
Fully connected softmax classifier trained with mini-batch backpropagation
(adam or momentum sgd), L2-penalized, early-stopped on a validation holdout.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from app.exceptions import InvalidParameterError

ACTIVATIONS = ("logistic", "tanh", "relu")
SOLVERS = ("adam", "sgd")

Params = Tuple[List[np.ndarray], List[np.ndarray]]


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "logistic":
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    if activation == "tanh":
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _activation_derivative(a: np.ndarray, activation: str) -> np.ndarray:
    """Derivative expressed through the activation output."""
    if activation == "logistic":
        return a * (1.0 - a)
    if activation == "tanh":
        return 1.0 - a ** 2
    return (a > 0).astype(float)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class MultilayerPerceptron(ClassifierMixin, BaseEstimator):
    """Softmax cross-entropy network; scikit-learn compatible."""

    def __init__(
        self,
        hidden_layer_sizes: Sequence[int] = (50,),
        activation: str = "relu",
        solver: str = "adam",
        alpha: float = 0.0001,
        learning_rate: float = 1e-3,
        batch_size: int = 32,
        max_epochs: int = 2000,
        patience: int = 50,
        tol: float = 1e-4,
        validation_fraction: float = 0.1,
        momentum: float = 0.9,
        random_state: Optional[int] = None,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.activation = activation
        self.solver = solver
        self.alpha = alpha
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.tol = tol
        self.validation_fraction = validation_fraction
        self.momentum = momentum
        self.random_state = random_state

    # ------------------------------------------------------------------
    # forward / backward
    # ------------------------------------------------------------------

    def _forward(self, X: np.ndarray, coefs, intercepts) -> List[np.ndarray]:
        activations = [X]
        for layer, (W, b) in enumerate(zip(coefs, intercepts)):
            z = activations[-1] @ W + b
            if layer == len(coefs) - 1:
                activations.append(_softmax(z))
            else:
                activations.append(_activate(z, self.activation))
        return activations

    def loss_and_gradients(self, X: np.ndarray, Y: np.ndarray, coefs: List[np.ndarray],
                           intercepts: List[np.ndarray]) -> Tuple[float, List[np.ndarray], List[np.ndarray]]:
        """
        Mean cross-entropy plus ``alpha / 2 * sum(W^2) / n`` and its exact gradients.

        ``Y`` is the one-hot target matrix.
        """
        n = X.shape[0]
        activations = self._forward(X, coefs, intercepts)
        probabilities = np.clip(activations[-1], 1e-300, 1.0)
        loss = -np.sum(Y * np.log(probabilities)) / n
        loss += 0.5 * self.alpha * sum(np.sum(W ** 2) for W in coefs) / n

        grad_coefs = [np.empty_like(W) for W in coefs]
        grad_intercepts = [np.empty_like(b) for b in intercepts]
        delta = (activations[-1] - Y) / n
        for layer in range(len(coefs) - 1, -1, -1):
            grad_coefs[layer] = activations[layer].T @ delta + self.alpha * coefs[layer] / n
            grad_intercepts[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ coefs[layer].T) * _activation_derivative(activations[layer], self.activation)
        return float(loss), grad_coefs, grad_intercepts

    # ------------------------------------------------------------------
    # training
    # ------------------------------------------------------------------

    def _check_params(self) -> None:
        if self.activation not in ACTIVATIONS:
            raise InvalidParameterError(f"activation must be one of {ACTIVATIONS}, got '{self.activation}'")
        if self.solver not in SOLVERS:
            raise InvalidParameterError(f"solver must be one of {SOLVERS}, got '{self.solver}'")
        sizes = tuple(self.hidden_layer_sizes)
        if not sizes or any(int(s) < 1 for s in sizes):
            raise InvalidParameterError(f"hidden_layer_sizes must be positive, got {sizes}")
        if self.tol < 0:
            raise InvalidParameterError("tol must be non-negative")
        if self.alpha < 0:
            raise InvalidParameterError("alpha must be non-negative")

    def initialize(self, n_features: int, n_outputs: int, rng: np.random.Generator) -> Params:
        """Glorot-uniform weights and biases."""
        sizes = [n_features] + [int(s) for s in self.hidden_layer_sizes] + [n_outputs]
        factor = 2.0 if self.activation == "logistic" else 6.0
        coefs, intercepts = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = np.sqrt(factor / (fan_in + fan_out))
            coefs.append(rng.uniform(-bound, bound, (fan_in, fan_out)))
            intercepts.append(rng.uniform(-bound, bound, fan_out))
        return coefs, intercepts

    def fit(self, X, y):
        self._check_params()
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.classes_, encoded = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise InvalidParameterError("the perceptron needs at least two classes")
        self.n_features_in_ = X.shape[1]
        Y = np.eye(self.classes_.size)[encoded]

        rng = np.random.Generator(np.random.PCG64(self.random_state))
        order = rng.permutation(X.shape[0])
        n_val = int(round(self.validation_fraction * X.shape[0])) if X.shape[0] >= 10 else 0
        val_idx, train_idx = order[:n_val], order[n_val:]
        X_train, Y_train = X[train_idx], Y[train_idx]
        X_val, Y_val = (X[val_idx], Y[val_idx]) if n_val else (X_train, Y_train)

        coefs, intercepts = self.initialize(X.shape[1], self.classes_.size, rng)
        params = coefs + intercepts
        first = [np.zeros_like(p) for p in params]
        second = [np.zeros_like(p) for p in params]
        step = 0

        batch = min(self.batch_size, X_train.shape[0])
        best_loss, best_params, stale = np.inf, [p.copy() for p in params], 0
        self.loss_curve_ = []
        for epoch in range(self.max_epochs):
            permutation = rng.permutation(X_train.shape[0])
            for start in range(0, X_train.shape[0], batch):
                rows = permutation[start:start + batch]
                _, grad_coefs, grad_intercepts = self.loss_and_gradients(
                    X_train[rows], Y_train[rows], coefs, intercepts
                )
                step += 1
                for p, g, m, v in zip(params, grad_coefs + grad_intercepts, first, second):
                    if self.solver == "adam":
                        m *= 0.9
                        m += 0.1 * g
                        v *= 0.999
                        v += 0.001 * g ** 2
                        m_hat = m / (1 - 0.9 ** step)
                        v_hat = v / (1 - 0.999 ** step)
                        p -= self.learning_rate * m_hat / (np.sqrt(v_hat) + 1e-8)
                    else:
                        m *= self.momentum
                        m -= self.learning_rate * g
                        p += m

            val_loss = self.loss_and_gradients(X_val, Y_val, coefs, intercepts)[0]
            self.loss_curve_.append(val_loss)
            if val_loss < best_loss - self.tol:
                best_loss, best_params, stale = val_loss, [p.copy() for p in params], 0
            else:
                stale += 1
                if stale >= self.patience:
                    break

        n_layers = len(coefs)
        self.coefs_ = best_params[:n_layers]
        self.intercepts_ = best_params[n_layers:]
        self.n_epochs_ = epoch + 1
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "coefs_")
        return self._forward(np.asarray(X, dtype=float), self.coefs_, self.intercepts_)[-1]

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
