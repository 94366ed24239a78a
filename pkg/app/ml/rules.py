"""
Hyperparameter Rules for the classifier families

Search spaces, the coarse grids used by default runs and the published best
hyperparameters are centralized here. Modify these values to change what a
grid search explores without touching the training code.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Dict, List

from app.exceptions import InvalidParameterError


@dataclass(frozen=True)
class NumericRange(Sequence):
    """Inclusive arithmetic range start, start+step, ..., stop; indexed lazily."""

    start: float
    stop: float
    step: float
    integer: bool = False

    def __len__(self) -> int:
        return int(math.floor((self.stop - self.start) / self.step + 1e-6)) + 1

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        if index < 0:
            index += len(self)
        if not 0 <= index < len(self):
            raise IndexError(index)
        value = self.start + index * self.step
        return int(round(value)) if self.integer else round(value, 10)

    def __contains__(self, value) -> bool:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        if not self.start - 1e-12 <= value <= self.stop + 1e-12:
            return False
        offset = (value - self.start) / self.step
        return abs(offset - round(offset)) < 1e-6


@dataclass(frozen=True)
class HiddenLayerRange(Sequence):
    """Every architecture of 1..max_layers layers with widths from ``widths``."""

    widths: NumericRange
    max_layers: int = 3

    def __len__(self) -> int:
        return sum(len(self.widths) ** depth for depth in range(1, self.max_layers + 1))

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        if index < 0:
            index += len(self)
        if not 0 <= index < len(self):
            raise IndexError(index)
        for depth in range(1, self.max_layers + 1):
            block = len(self.widths) ** depth
            if index < block:
                digits = []
                for _ in range(depth):
                    index, digit = divmod(index, len(self.widths))
                    digits.append(self.widths[digit])
                return tuple(reversed(digits))
            index -= block
        raise IndexError(index)

    def __contains__(self, value) -> bool:
        value = tuple(value)
        return 1 <= len(value) <= self.max_layers and all(w in self.widths for w in value)


@dataclass
class FamilyRules:
    """Search space, coarse grid and defaults of one classifier family."""

    family: str
    search_space: Dict[str, Sequence]
    coarse_grid: Dict[str, List[Any]]
    defaults: Dict[str, Any]

    def check(self, name: str, value: Any) -> None:
        if name not in self.search_space:
            raise InvalidParameterError(
                f"unknown {self.family} hyperparameter '{name}', expected one of {sorted(self.search_space)}"
            )
        allowed = self.search_space[name]
        probe = tuple(value) if isinstance(value, list) else value
        if probe not in allowed:
            raise InvalidParameterError(f"{self.family} {name}={value!r} is outside the search space")


@dataclass
class HyperparameterRules:
    """Master configuration for all classifier search spaces."""

    # ============= SHARED RANGES =============
    tree_depth: NumericRange = NumericRange(2, 10, 1, integer=True)
    tree_split: NumericRange = NumericRange(2, 10, 1, integer=True)
    tree_leaf: NumericRange = NumericRange(1, 10, 1, integer=True)

    # ============= CROSS-VALIDATION =============
    cv_folds: int = 10
    cv_repeats: int = 3
    selection_folds: int = 5

    # ============= MLP TRAINING =============
    mlp_batch_size: int = 32
    mlp_max_epochs: int = 2000
    mlp_patience: int = 50
    mlp_tol: float = 1e-4
    mlp_validation_fraction: float = 0.1
    mlp_learning_rate: float = 1e-3

    # ============= SVM SOLVER =============
    svm_tol: float = 1e-3
    svm_iterations_per_sample: int = 10 * 1000

    families: Dict[str, FamilyRules] = None

    def __post_init__(self):
        if self.families is None:
            self.families = {
                "svm": FamilyRules(
                    family="svm",
                    search_space={
                        "kernel": ["linear", "polynomial", "rbf"],
                        "C": NumericRange(0.01, 100.0, 0.01),
                        "gamma": NumericRange(0.001, 1.0, 0.001),
                    },
                    coarse_grid={
                        "kernel": ["linear", "polynomial", "rbf"],
                        "C": [0.01, 0.1, 1.0, 10.0, 100.0],
                        "gamma": [0.001, 0.01, 0.1, 1.0],
                    },
                    defaults={"kernel": "linear", "C": 1.0, "gamma": 0.001},
                ),
                "dt": FamilyRules(
                    family="dt",
                    search_space={
                        "max_depth": self.tree_depth,
                        "min_samples_split": self.tree_split,
                        "min_samples_leaf": self.tree_leaf,
                    },
                    coarse_grid={
                        "max_depth": [2, 5, 10],
                        "min_samples_split": [2, 4, 10],
                        "min_samples_leaf": [1, 4, 8],
                    },
                    defaults={"max_depth": 2, "min_samples_split": 4, "min_samples_leaf": 8},
                ),
                "rf": FamilyRules(
                    family="rf",
                    search_space={
                        "n_estimators": NumericRange(10, 100, 10, integer=True),
                        "max_depth": self.tree_depth,
                        "min_samples_split": self.tree_split,
                        "min_samples_leaf": self.tree_leaf,
                    },
                    coarse_grid={
                        "n_estimators": [10, 40, 100],
                        "max_depth": [2, 9],
                        "min_samples_split": [2, 5],
                        "min_samples_leaf": [1, 4],
                    },
                    defaults={"n_estimators": 40, "max_depth": 9, "min_samples_split": 5,
                              "min_samples_leaf": 4},
                ),
                "mlp": FamilyRules(
                    family="mlp",
                    search_space={
                        "hidden_layer_sizes": HiddenLayerRange(NumericRange(10, 1000, 10, integer=True)),
                        "activation": ["logistic", "tanh", "relu"],
                        "solver": ["adam", "sgd"],
                        "alpha": NumericRange(0.0001, 0.1, 0.0001),
                    },
                    coarse_grid={
                        "hidden_layer_sizes": [(50,), (100,), (50, 50)],
                        "activation": ["logistic", "tanh", "relu"],
                        "solver": ["adam"],
                        "alpha": [0.0001, 0.1],
                    },
                    defaults={"hidden_layer_sizes": (50,), "activation": "relu", "solver": "adam",
                              "alpha": 0.1},
                ),
            }

    def rules_for(self, family: str) -> FamilyRules:
        try:
            return self.families[family]
        except KeyError:
            raise InvalidParameterError(
                f"unknown model family '{family}', expected one of {sorted(self.families)}"
            ) from None

    def validate(self, family: str, hyperparameters: Dict[str, Any]) -> Dict[str, Any]:
        """Defaults overlaid with ``hyperparameters``; every value checked against the search space."""
        rules = self.rules_for(family)
        merged = dict(rules.defaults)
        merged.update(hyperparameters or {})
        for name, value in merged.items():
            rules.check(name, value)
        if "hidden_layer_sizes" in merged:
            merged["hidden_layer_sizes"] = tuple(merged["hidden_layer_sizes"])
        return merged


# ============= GLOBAL INSTANCE =============
HYPERPARAMETER_RULES = HyperparameterRules()


# ============= HELPER FUNCTIONS =============

def grid_axes(family: str, density: str = "coarse") -> Dict[str, Sequence]:
    """Axes of the coarse grid or of the full search space."""
    rules = HYPERPARAMETER_RULES.rules_for(family)
    if density == "coarse":
        return {name: list(values) for name, values in rules.coarse_grid.items()}
    if density == "full":
        return dict(rules.search_space)
    raise InvalidParameterError(f"grid density must be 'coarse' or 'full', got '{density}'")


def grid_cardinality(family: str, density: str = "coarse") -> int:
    return math.prod(len(values) for values in grid_axes(family, density).values())


def published_defaults() -> Dict[str, Dict[str, Any]]:
    return {name: dict(rules.defaults) for name, rules in HYPERPARAMETER_RULES.families.items()}

