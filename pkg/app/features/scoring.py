"""
Behavioural scoring
Percentage accuracy on the task and the mapping of pre/post accuracy change
onto the three enhancement classes.
"""

import math
from typing import List, Sequence, Tuple

from loguru import logger

from app.exceptions import InvalidParameterError
from .models import BehaviourRecord, ClassBinning, ClassLabel


def percentage_accuracy(correct: int, total: int) -> float:
    """100 * correct / total."""
    if total <= 0:
        raise InvalidParameterError(f"total must be positive, got {total}")
    if not 0 <= correct <= total:
        raise InvalidParameterError(f"correct must lie in [0, {total}], got {correct}")
    return 100.0 * correct / total


def classify_delta(delta_accuracy: float, binning: ClassBinning) -> Tuple[ClassLabel, bool]:
    """Label for an accuracy change and whether it had to be clamped into the bins."""
    if not math.isfinite(delta_accuracy):
        raise InvalidParameterError(f"accuracy change must be finite, got {delta_accuracy}")
    low_edge, medium_edge, high_edge, top_edge = binning.edges
    low, medium, high = binning.labels
    if delta_accuracy < low_edge:
        return low, True
    if delta_accuracy < medium_edge:
        return low, False
    if delta_accuracy < high_edge:
        return medium, False
    return high, delta_accuracy > top_edge


def bin_label(delta_accuracy: float, binning: ClassBinning) -> ClassLabel:
    """Bin an accuracy change; out-of-range values clamp with a warning."""
    label, clamped = classify_delta(delta_accuracy, binning)
    if clamped:
        logger.warning(
            f"accuracy change {delta_accuracy:.2f} lies outside "
            f"[{binning.edges[0]:.2f}, {binning.edges[3]:.2f}], clamped to '{label.value}'"
        )
    return label


def accuracy_deltas(records: Sequence[BehaviourRecord]) -> List[float]:
    """Post minus pre percentage accuracy per subject."""
    return [
        percentage_accuracy(r.post_correct, r.total_trials)
        - percentage_accuracy(r.pre_correct, r.total_trials)
        for r in records
    ]


def label_subjects(records: Sequence[BehaviourRecord], binning: ClassBinning) -> dict:
    """subject_id -> class label value."""
    return {
        record.subject_id: bin_label(delta, binning).value
        for record, delta in zip(records, accuracy_deltas(records))
    }
