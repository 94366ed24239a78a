"""
Classifier Service
Training and prediction for the four classifier families, repeated stratified
k-fold splitting and cross-validated grid search.
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from sklearn.ensemble import RandomForestClassifier
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import RepeatedStratifiedKFold
from sklearn.multiclass import OneVsRestClassifier
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVC
from sklearn.tree import DecisionTreeClassifier

from app.config import settings
from app.exceptions import DegenerateDataError, InvalidParameterError, SchemaMismatchError
from app.features import Dataset, FeatureVector
from app.seeding import derive_seed
from .mlp import MultilayerPerceptron
from .models import CvReport, CvSpec, GridPointScore, HyperparameterGrid, ModelFamily, TrainedModel
from .rules import HYPERPARAMETER_RULES

Split = Tuple[np.ndarray, np.ndarray]
SCALED_FAMILIES = (ModelFamily.SVM, ModelFamily.MLP)
KERNEL_NAMES = {"linear": "linear", "polynomial": "poly", "rbf": "rbf"}


def _sklearn_seed(seed: int) -> int:
    return int(seed) % (2 ** 32)


def build_estimator(family: Union[ModelFamily, str], hyperparameters: Optional[Dict[str, Any]],
                    seed: int, n_samples: int, n_features: int):
    """Unfitted estimator for a family; hyperparameters default to the published best."""
    family = ModelFamily(family)
    params = HYPERPARAMETER_RULES.validate(family.value, hyperparameters or {})
    rules = HYPERPARAMETER_RULES
    if family is ModelFamily.SVM:
        return OneVsRestClassifier(SVC(
            kernel=KERNEL_NAMES[params["kernel"]],
            C=float(params["C"]),
            gamma=float(params["gamma"]),
            tol=rules.svm_tol,
            max_iter=rules.svm_iterations_per_sample * max(n_samples, 1),
        ))
    if family is ModelFamily.DT:
        return DecisionTreeClassifier(
            criterion="gini",
            max_depth=int(params["max_depth"]),
            min_samples_split=int(params["min_samples_split"]),
            min_samples_leaf=int(params["min_samples_leaf"]),
            random_state=_sklearn_seed(seed),
        )
    if family is ModelFamily.RF:
        return RandomForestClassifier(
            n_estimators=int(params["n_estimators"]),
            criterion="gini",
            max_depth=int(params["max_depth"]),
            min_samples_split=int(params["min_samples_split"]),
            min_samples_leaf=int(params["min_samples_leaf"]),
            max_features=max(1, math.ceil(math.sqrt(n_features))),
            bootstrap=True,
            random_state=_sklearn_seed(seed),
        )
    return MultilayerPerceptron(
        hidden_layer_sizes=tuple(params["hidden_layer_sizes"]),
        activation=params["activation"],
        solver=params["solver"],
        alpha=float(params["alpha"]),
        learning_rate=rules.mlp_learning_rate,
        batch_size=rules.mlp_batch_size,
        max_epochs=rules.mlp_max_epochs,
        patience=rules.mlp_patience,
        tol=rules.mlp_tol,
        validation_fraction=rules.mlp_validation_fraction,
        random_state=_sklearn_seed(seed),
    )


def _fit_arrays(family: ModelFamily, hyperparameters: Optional[Dict[str, Any]],
                X: np.ndarray, y: np.ndarray, seed: int):
    if np.unique(y).size < 2:
        raise DegenerateDataError("training data contains a single class")
    if not np.all(np.isfinite(X)):
        raise InvalidParameterError("training features must be finite")
    scaler = StandardScaler().fit(X) if family in SCALED_FAMILIES else None
    estimator = build_estimator(family, hyperparameters, seed, X.shape[0], X.shape[1])
    estimator.fit(scaler.transform(X) if scaler else X, y)
    return estimator, scaler


def train(family: Union[ModelFamily, str], hyperparameters: Optional[Dict[str, Any]],
          data: Dataset, seed: int = 0) -> TrainedModel:
    """Fit one family on a dataset."""
    family = ModelFamily(family)
    params = HYPERPARAMETER_RULES.validate(family.value, hyperparameters or {})
    estimator, scaler = _fit_arrays(family, params, data.features, data.y, seed)
    return TrainedModel(
        family=family,
        hyperparameters=params,
        estimator=estimator,
        feature_ids=data.feature_ids,
        classes=tuple(str(c) for c in estimator.classes_),
        scaler=scaler,
    )


def predict_many(model: TrainedModel, features: np.ndarray) -> np.ndarray:
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if features.shape[1] != model.n_features:
        raise SchemaMismatchError(
            f"model expects {model.n_features} features, got {features.shape[1]}"
        )
    if model.scaler is not None:
        features = model.scaler.transform(features)
    return model.estimator.predict(features)


def predict(model: TrainedModel, features: Union[FeatureVector, np.ndarray]) -> str:
    """Class label of one feature vector."""
    if isinstance(features, FeatureVector):
        if features.feature_ids != model.feature_ids:
            raise SchemaMismatchError("feature vector schema does not match the training schema")
        features = features.values
    return str(predict_many(model, np.asarray(features).reshape(1, -1))[0])


# ============= CROSS-VALIDATION =============

def repeated_stratified_kfold(data: Union[Dataset, Sequence[str]], k: int = 10, repeats: int = 3,
                              seed: int = 0) -> List[Split]:
    """
    k x repeats (train, test) index pairs; each repeat's test sets partition the rows.

    k drops to the smallest class count (with a warning) when a class has
    fewer than k members.
    """
    y = data.y if isinstance(data, Dataset) else np.asarray(data)
    _, counts = np.unique(y, return_counts=True)
    if counts.size < 2:
        raise DegenerateDataError("cross-validation needs at least two classes")
    smallest = int(counts.min())
    if smallest < 2:
        raise DegenerateDataError("every class needs at least 2 samples for stratified splitting")
    if smallest < k:
        logger.warning(f"smallest class has {smallest} samples, reducing folds from {k} to {smallest}")
        k = smallest
    splitter = RepeatedStratifiedKFold(n_splits=k, n_repeats=repeats, random_state=_sklearn_seed(seed))
    return [(train, test) for train, test in splitter.split(np.zeros((y.size, 1)), y)]


def _fold_predictions(family: ModelFamily, params: Dict[str, Any], X: np.ndarray, y: np.ndarray,
                      split: Split, columns: Optional[Sequence[int]], seed: int) -> np.ndarray:
    train_idx, test_idx = split
    if columns is not None:
        X = X[:, list(columns)]
    estimator, scaler = _fit_arrays(family, params, X[train_idx], y[train_idx], seed)
    X_test = X[test_idx]
    return estimator.predict(scaler.transform(X_test) if scaler else X_test)


def search_splits(
    X: np.ndarray,
    y: np.ndarray,
    splits: Sequence[Split],
    grid: HyperparameterGrid,
    seed: int,
    fold_columns: Optional[Sequence[Sequence[int]]] = None,
    n_jobs: Optional[int] = None,
) -> CvReport:
    """
    Score every grid point on precomputed splits and report the best.

    ``fold_columns[f]`` restricts fold f to a column subset. The winner is
    the first point (in grid order) with the highest mean accuracy.
    """
    if grid.cardinality == 0:
        raise InvalidParameterError("empty hyperparameter grid")
    points = [HYPERPARAMETER_RULES.validate(grid.family.value, p) for p in grid.points()]
    logger.debug(f"{grid.family.value} grid search: {len(points)} points x {len(splits)} folds")

    tasks = [(g, f) for g in range(len(points)) for f in range(len(splits))]
    predictions = Parallel(n_jobs=n_jobs or settings.JOBS)(
        delayed(_fold_predictions)(
            grid.family, points[g], X, y, splits[f],
            fold_columns[f] if fold_columns is not None else None,
            derive_seed(seed, g, f),
        )
        for g, f in tasks
    )

    n_folds = len(splits)
    accuracies = np.array([
        float(np.mean(pred == y[splits[f][1]])) for (_, f), pred in zip(tasks, predictions)
    ]).reshape(len(points), n_folds)
    means = [float(np.mean(row)) for row in accuracies]
    best = int(np.argmax(means))

    classes = sorted(str(c) for c in np.unique(y))
    best_predictions = predictions[best * n_folds:(best + 1) * n_folds]
    truth = np.concatenate([y[test] for _, test in splits]).astype(str)
    predicted = np.concatenate(best_predictions).astype(str)
    matrix = confusion_matrix(truth, predicted, labels=classes)

    return CvReport(
        family=grid.family,
        fold_accuracies=[float(a) for a in accuracies[best]],
        mean_accuracy=means[best],
        best_hyperparameters=points[best],
        seed=seed,
        classes=classes,
        confusion_matrix=matrix.tolist(),
        grid_scores=[GridPointScore(hyperparameters=p, mean_accuracy=m) for p, m in zip(points, means)],
        n_grid_points=len(points),
    )


def grid_search(data: Dataset, grid: HyperparameterGrid, cv: Optional[CvSpec] = None,
                seed: int = 0, n_jobs: Optional[int] = None) -> CvReport:
    """Exhaustive grid search scored by repeated stratified k-fold accuracy."""
    cv = cv or CvSpec()
    splits = repeated_stratified_kfold(data, cv.folds, cv.repeats, seed)
    return search_splits(data.features, data.y, splits, grid, seed, n_jobs=n_jobs)
