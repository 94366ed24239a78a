"""Machine learning module"""
from .mlp import MultilayerPerceptron
from .models import (
    CellId,
    CvReport,
    CvSpec,
    GridPointScore,
    HyperparameterGrid,
    ModelFamily,
    TrainedModel,
)
from .pipeline import Selector, evaluate_dataset, evaluate_pipeline, select_for_fold
from .rules import HYPERPARAMETER_RULES, grid_axes, grid_cardinality, published_defaults
from .service import (
    build_estimator,
    grid_search,
    predict,
    predict_many,
    repeated_stratified_kfold,
    search_splits,
    train,
)

__all__ = [
    "MultilayerPerceptron",
    "CellId",
    "CvReport",
    "CvSpec",
    "GridPointScore",
    "HyperparameterGrid",
    "ModelFamily",
    "TrainedModel",
    "Selector",
    "evaluate_dataset",
    "evaluate_pipeline",
    "select_for_fold",
    "HYPERPARAMETER_RULES",
    "grid_axes",
    "grid_cardinality",
    "published_defaults",
    "build_estimator",
    "grid_search",
    "predict",
    "predict_many",
    "repeated_stratified_kfold",
    "search_splits",
    "train",
]
