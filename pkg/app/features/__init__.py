"""Features module"""
from .models import (
    BehaviourRecord,
    ClassBinning,
    ClassLabel,
    Dataset,
    DatasetSchema,
    FeatureId,
    FeatureVector,
)
from .scoring import accuracy_deltas, bin_label, classify_delta, label_subjects, percentage_accuracy
from .selection import (
    DEFAULT_TOP_K,
    cv_scorer,
    forward_feature_selection,
    linear_importance,
    recursive_feature_elimination,
)
from .service import (
    build_dataset,
    connectivity_delta,
    flatten,
    load_behaviour,
    load_dataset,
    save_behaviour,
    save_dataset,
)

__all__ = [
    "BehaviourRecord",
    "ClassBinning",
    "ClassLabel",
    "Dataset",
    "DatasetSchema",
    "FeatureId",
    "FeatureVector",
    "accuracy_deltas",
    "bin_label",
    "classify_delta",
    "label_subjects",
    "percentage_accuracy",
    "DEFAULT_TOP_K",
    "cv_scorer",
    "forward_feature_selection",
    "linear_importance",
    "recursive_feature_elimination",
    "build_dataset",
    "connectivity_delta",
    "flatten",
    "load_behaviour",
    "load_dataset",
    "save_behaviour",
    "save_dataset",
]
