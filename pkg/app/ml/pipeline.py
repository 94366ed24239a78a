"""
Evaluation pipeline
Connectivity change -> flattened features -> per-fold feature selection ->
cross-validated grid search, for one (metric, selector, family) cell.
"""

import enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from app.config import settings
from app.connectivity import ConnectivityMatrix
from app.exceptions import DegenerateDataError, InvalidParameterError
from app.features import (
    DEFAULT_TOP_K,
    Dataset,
    build_dataset,
    cv_scorer,
    forward_feature_selection,
    linear_importance,
    recursive_feature_elimination,
)
from app.features.selection import FFS_TOL
from app.seeding import derive_seed
from .models import CellId, CvReport, CvSpec, HyperparameterGrid, ModelFamily
from .rules import HYPERPARAMETER_RULES
from .service import Split, build_estimator, repeated_stratified_kfold, search_splits

# Key namespace separating selection seeds from grid-search seeds.
SELECTION_STREAM = 7919


class Selector(str, enum.Enum):
    FFS = "ffs"
    RFE = "rfe"


def select_for_fold(
    data: Dataset,
    train_idx: np.ndarray,
    selector: Union[Selector, str],
    k: int,
    family: Union[ModelFamily, str],
    seed: int,
    ffs_scorer: Optional[Union[ModelFamily, str]] = None,
) -> List[int]:
    """Feature indices chosen from the training rows of one fold."""
    selector = Selector(selector)
    training = data.select_rows(train_idx)
    if selector is Selector.RFE:
        return recursive_feature_elimination(training, k, linear_importance(seed))

    scorer_family = ModelFamily(ffs_scorer or family)
    estimator = build_estimator(scorer_family, None, seed, training.n_rows, k)
    if scorer_family in (ModelFamily.SVM, ModelFamily.MLP):
        estimator = make_pipeline(StandardScaler(), estimator)
    scorer = cv_scorer(estimator, HYPERPARAMETER_RULES.selection_folds, seed)
    return forward_feature_selection(training, k, scorer, tol=FFS_TOL)


def evaluate_dataset(
    data: Dataset,
    selector: Union[Selector, str],
    family: Union[ModelFamily, str],
    grid: Optional[HyperparameterGrid] = None,
    seed: int = 0,
    k: int = DEFAULT_TOP_K,
    cv: Optional[CvSpec] = None,
    ffs_scorer: Optional[Union[ModelFamily, str]] = None,
    n_jobs: Optional[int] = None,
    splits: Optional[Sequence[Split]] = None,
) -> CvReport:
    """Nested evaluation: selection is refitted on every training fold."""
    selector, family = Selector(selector), ModelFamily(family)
    if len(data.classes) < 2:
        raise DegenerateDataError("evaluation needs at least two classes")
    grid = grid or HyperparameterGrid.coarse(family)
    if grid.family is not family:
        raise InvalidParameterError(f"grid is for {grid.family.value}, not {family.value}")
    if k > data.n_features:
        logger.warning(f"k={k} exceeds {data.n_features} features, selecting all of them")
        k = data.n_features
    cv = cv or CvSpec()
    n_jobs = n_jobs or settings.JOBS

    if splits is None:
        splits = repeated_stratified_kfold(data, cv.folds, cv.repeats, seed)
    fold_columns = Parallel(n_jobs=n_jobs)(
        delayed(select_for_fold)(data, train, selector, k, family,
                                 derive_seed(seed, SELECTION_STREAM, fold), ffs_scorer)
        for fold, (train, _) in enumerate(splits)
    )
    logger.debug(f"{selector.value}: kept {np.mean([len(c) for c in fold_columns]):.1f} "
                 f"features per fold on average")

    report = search_splits(data.features, data.y, splits, grid, seed, fold_columns, n_jobs)
    report.selected_features = [[str(data.feature_ids[i]) for i in columns] for columns in fold_columns]
    return report


def evaluate_pipeline(
    subjects: Dict[str, Tuple[ConnectivityMatrix, ConnectivityMatrix]],
    labels: Dict[str, str],
    metric: str,
    selector: Union[Selector, str],
    family: Union[ModelFamily, str],
    grid: Optional[HyperparameterGrid] = None,
    seed: int = 0,
    k: int = DEFAULT_TOP_K,
    cv: Optional[CvSpec] = None,
    delta_mode: str = "absolute",
    ffs_scorer: Optional[Union[ModelFamily, str]] = None,
    n_jobs: Optional[int] = None,
) -> CvReport:
    """Report for one (metric, selector, family) cell from per-subject pre/post matrices."""
    for subject_id, (pre, post) in subjects.items():
        if pre.metric.value != metric or post.metric.value != metric:
            raise InvalidParameterError(f"subject {subject_id} has matrices of another metric")
    data = build_dataset(subjects, labels, delta_mode)
    logger.info(f"Evaluating {metric}/{Selector(selector).value}/{ModelFamily(family).value} "
                f"on {data.n_rows} subjects")
    report = evaluate_dataset(data, selector, family, grid, seed, k, cv, ffs_scorer, n_jobs)
    report.cell = CellId(metric=metric, selector=Selector(selector).value, family=ModelFamily(family))
    return report
