"""
Classifier data model
Hyperparameter grids, fitted models and cross-validation reports.
"""

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from sklearn.model_selection import ParameterGrid

from app.exceptions import InvalidParameterError
from app.features import FeatureId
from .rules import HYPERPARAMETER_RULES, grid_axes


class ModelFamily(str, enum.Enum):
    SVM = "svm"
    DT = "dt"
    RF = "rf"
    MLP = "mlp"


@dataclass(frozen=True)
class HyperparameterGrid:
    """Named axes of one family; points are enumerated by ``ParameterGrid``."""

    family: ModelFamily
    axes: Dict[str, Sequence]

    def __post_init__(self):
        object.__setattr__(self, "family", ModelFamily(self.family))
        rules = HYPERPARAMETER_RULES.rules_for(self.family.value)
        if not self.axes:
            raise InvalidParameterError(f"{self.family.value} grid has no axes")
        for name, values in self.axes.items():
            if len(values) == 0:
                raise InvalidParameterError(f"{self.family.value} grid axis '{name}' is empty")
            explicit = isinstance(values, (list, tuple))
            checked = values if explicit else (values[0], values[len(values) - 1])
            for value in checked:
                rules.check(name, value)

    @classmethod
    def coarse(cls, family) -> "HyperparameterGrid":
        family = ModelFamily(family)
        return cls(family, grid_axes(family.value, "coarse"))

    @classmethod
    def full(cls, family) -> "HyperparameterGrid":
        family = ModelFamily(family)
        return cls(family, grid_axes(family.value, "full"))

    @classmethod
    def single(cls, family, **hyperparameters) -> "HyperparameterGrid":
        family = ModelFamily(family)
        point = HYPERPARAMETER_RULES.validate(family.value, hyperparameters)
        return cls(family, {name: [value] for name, value in point.items()})

    @property
    def cardinality(self) -> int:
        return math.prod(len(values) for values in self.axes.values())

    def points(self) -> ParameterGrid:
        return ParameterGrid({name: values for name, values in self.axes.items()})


@dataclass(frozen=True)
class TrainedModel:
    """A fitted estimator with the schema and classes it was trained on."""

    family: ModelFamily
    hyperparameters: Dict[str, Any]
    estimator: Any
    feature_ids: Tuple[FeatureId, ...]
    classes: Tuple[str, ...]
    scaler: Optional[Any] = None

    @property
    def n_features(self) -> int:
        return len(self.feature_ids)


# ============= CROSS-VALIDATION =============

class CvSpec(BaseModel):
    folds: int = Field(default=10, ge=2)
    repeats: int = Field(default=3, ge=1)


class CellId(BaseModel):
    metric: str
    selector: str
    family: ModelFamily


class GridPointScore(BaseModel):
    hyperparameters: Dict[str, Any]
    mean_accuracy: float


class CvReport(BaseModel):
    """Repeated stratified k-fold result of the best grid point."""

    family: ModelFamily
    fold_accuracies: List[float]
    mean_accuracy: float
    best_hyperparameters: Dict[str, Any]
    seed: int
    classes: List[str]
    confusion_matrix: List[List[int]]
    grid_scores: List[GridPointScore] = []
    n_grid_points: int = 1
    cell: Optional[CellId] = None
    selected_features: Optional[List[List[str]]] = None

    @model_validator(mode="after")
    def _check_consistency(self):
        if not self.fold_accuracies:
            raise ValueError("a report needs at least one fold")
        if abs(self.mean_accuracy - float(np.mean(self.fold_accuracies))) > 1e-12:
            raise ValueError("mean_accuracy must equal the mean of the fold accuracies")
        n = len(self.classes)
        if len(self.confusion_matrix) != n or any(len(row) != n for row in self.confusion_matrix):
            raise ValueError("the confusion matrix must be classes x classes")
        return self

    @property
    def mean_accuracy_percent(self) -> float:
        return 100.0 * self.mean_accuracy
