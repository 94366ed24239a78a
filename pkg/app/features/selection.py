"""
Feature selection
Greedy forward selection driven by a cross-validated score and recursive
elimination driven by linear one-vs-rest weights.
"""

from typing import Callable, List, Optional

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from sklearn.base import BaseEstimator, clone
from sklearn.model_selection import StratifiedKFold, cross_val_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVC, LinearSVC

from app.exceptions import DegenerateDataError, InvalidParameterError
from .models import Dataset

Scorer = Callable[[np.ndarray, np.ndarray], float]
Ranker = Callable[[np.ndarray, np.ndarray], np.ndarray]

DEFAULT_TOP_K = 100
FFS_TOL = 1e-12
SCORER_FOLDS = 5


def _check_selection(data: Dataset, k: int) -> None:
    if len(data.classes) < 2:
        raise DegenerateDataError("feature selection needs at least two classes")
    if not 1 <= k <= data.n_features:
        raise InvalidParameterError(f"k must lie in [1, {data.n_features}], got {k}")


def cv_scorer(estimator: Optional[BaseEstimator] = None, folds: int = SCORER_FOLDS,
              seed: int = 0) -> Scorer:
    """Mean stratified k-fold accuracy of ``estimator`` (linear SVM by default)."""
    if estimator is None:
        estimator = make_pipeline(StandardScaler(), SVC(kernel="linear", C=1.0))

    def score(X: np.ndarray, y: np.ndarray) -> float:
        _, counts = np.unique(y, return_counts=True)
        n_splits = max(2, min(folds, int(counts.min())))
        cv = StratifiedKFold(n_splits=n_splits, shuffle=True, random_state=seed % (2 ** 32))
        return float(np.mean(cross_val_score(clone(estimator), X, y, cv=cv)))

    return score


def forward_feature_selection(data: Dataset, k: int, scorer: Optional[Scorer] = None,
                              tol: Optional[float] = FFS_TOL, n_jobs: int = 1) -> List[int]:
    """
    Add, one at a time, the feature whose inclusion scores best.

    Ties go to the lowest feature index. With ``tol`` set, selection stops
    early once a full round improves the score by less than ``tol``; with
    ``tol=None`` exactly k indices are returned.
    """
    _check_selection(data, k)
    scorer = scorer or cv_scorer()
    X, y = data.features, data.y

    selected: List[int] = []
    remaining = list(range(data.n_features))
    best_score = -np.inf
    with Parallel(n_jobs=n_jobs) as parallel:
        while len(selected) < k:
            scores = parallel(delayed(scorer)(X[:, selected + [j]], y) for j in remaining)
            winner = int(np.argmax(scores))
            gain = scores[winner] - best_score
            if tol is not None and selected and gain < tol:
                logger.debug(f"FFS stopped at {len(selected)} features (gain {gain:.3g})")
                break
            best_score = scores[winner]
            selected.append(remaining.pop(winner))
    return selected


def linear_importance(seed: int = 0, C: float = 0.01) -> Ranker:
    """
    Sum over classes of squared one-vs-rest linear SVM weights on standardized features.

    The default C is small so that weights stay close to class-mean differences.
    """

    def rank(X: np.ndarray, y: np.ndarray) -> np.ndarray:
        scaled = StandardScaler().fit_transform(X)
        model = LinearSVC(C=C, dual=True, max_iter=10000, random_state=seed % (2 ** 32))
        model.fit(scaled, y)
        return np.sum(model.coef_ ** 2, axis=0)

    return rank


def recursive_feature_elimination(data: Dataset, k: int, ranker: Optional[Ranker] = None) -> List[int]:
    """
    Drop the least important feature until k remain; returns ascending indices.

    Importance is re-estimated after every removal. Among equally unimportant
    features the higher index goes first.
    """
    _check_selection(data, k)
    ranker = ranker or linear_importance()
    X, y = data.features, data.y

    active = np.arange(data.n_features)
    while active.size > k:
        importance = np.asarray(ranker(X[:, active], y), dtype=float)
        if importance.shape != active.shape:
            raise InvalidParameterError("the ranker must return one importance per feature")
        weakest = np.flatnonzero(importance == importance.min())[-1]
        active = np.delete(active, weakest)
    return active.tolist()
