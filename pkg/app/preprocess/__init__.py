"""Preprocessing module"""
from .models import BaselineMode, FilterKind, FilterSpec
from .service import (
    preprocess_recording,
    apply_filter,
    bandpass_filter,
    baseline_correct,
    design_filter,
    notch_filter,
    padding_length,
    rereference_average,
)

__all__ = [
    "BaselineMode",
    "FilterKind",
    "FilterSpec",
    "apply_filter",
    "bandpass_filter",
    "baseline_correct",
    "design_filter",
    "notch_filter",
    "padding_length",
    "preprocess_recording",
    "rereference_average",
]
