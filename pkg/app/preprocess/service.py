"""
Preprocessing chain
Zero-phase Butterworth band-pass and notch filtering, re-referencing to the
average of reference channels, and baseline correction.
"""

import math
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from scipy import signal

from app.exceptions import DegenerateDataError, InvalidParameterError, SchemaMismatchError
from app.signal_io import Recording
from .models import (
    DEFAULT_BANDPASS_ORDER,
    DEFAULT_NOTCH_HALF_WIDTH,
    DEFAULT_NOTCH_ORDER,
    BaselineMode,
    FilterKind,
    FilterSpec,
)

PADDING_FACTOR = 3


def design_filter(spec: FilterSpec, sample_rate: float) -> np.ndarray:
    """Second-order sections of the Butterworth design for ``spec``."""
    spec.validate(sample_rate)
    if spec.kind == FilterKind.BANDPASS:
        band, btype = [spec.low_cut, spec.high_cut], "bandpass"
    else:
        band = [spec.notch_center - spec.notch_half_width, spec.notch_center + spec.notch_half_width]
        btype = "bandstop"
    return signal.butter(spec.order, band, btype=btype, fs=sample_rate, output="sos")


def padding_length(sos: np.ndarray) -> int:
    """
    Reflect-padding length in samples: three time constants of the slowest pole.
    """
    _, poles, _ = signal.sos2zpk(sos)
    radius = float(np.max(np.abs(poles)))
    if radius >= 1.0:
        raise InvalidParameterError("designed filter is unstable")
    time_constant = -1.0 / math.log(radius) if radius > 0 else 1.0
    return PADDING_FACTOR * int(math.ceil(time_constant))


def apply_filter(rec: Recording, spec: FilterSpec) -> Recording:
    """Forward-backward application of ``spec`` to every channel."""
    sos = design_filter(spec, rec.sample_rate)
    padlen = padding_length(sos)
    if rec.n_samples <= padlen:
        raise InvalidParameterError(
            f"recording has {rec.n_samples} samples; {spec.kind.value} filtering needs more than "
            f"{padlen} (3x the filter's effective impulse length)"
        )
    filtered = signal.sosfiltfilt(sos, rec.data, axis=0, padtype="even", padlen=padlen)
    logger.debug(f"Applied {spec.kind.value} filter (order {spec.order}, padlen {padlen}) "
                 f"to {rec.subject_id}/{rec.session.value}")
    return rec.with_data(filtered)


def bandpass_filter(rec: Recording, low: float, high: float,
                    order: int = DEFAULT_BANDPASS_ORDER) -> Recording:
    """Zero-phase Butterworth band-pass between ``low`` and ``high`` Hz."""
    return apply_filter(rec, FilterSpec.bandpass(low, high, order))


def notch_filter(rec: Recording, center: float, order: int = DEFAULT_NOTCH_ORDER,
                 half_width: float = DEFAULT_NOTCH_HALF_WIDTH) -> Recording:
    """Zero-phase Butterworth band-stop of ``center`` +/- ``half_width`` Hz."""
    return apply_filter(rec, FilterSpec.notch(center, order, half_width))


def rereference_average(rec: Recording, reference_labels: Sequence[str]) -> Recording:
    """Subtract the per-sample mean of the reference channels from every channel."""
    if not reference_labels:
        raise InvalidParameterError("at least one reference channel is required")
    indices = [rec.channel_index(label) for label in reference_labels]
    reference = rec.data[:, indices].mean(axis=1, keepdims=True)
    return rec.with_data(rec.data - reference)


def baseline_correct(rec: Recording, baseline: Recording,
                     mode: BaselineMode = BaselineMode.MEAN) -> Recording:
    """
    Correct task data against a separate baseline recording.

    ``mean`` subtracts each baseline channel mean; ``zscore`` additionally
    divides by the baseline channel standard deviation.
    """
    if rec.channels != baseline.channels:
        raise SchemaMismatchError(
            f"baseline channels {list(baseline.channels)} do not match recording channels "
            f"{list(rec.channels)}"
        )
    if rec.sample_rate != baseline.sample_rate:
        raise SchemaMismatchError(
            f"baseline sample rate {baseline.sample_rate} Hz differs from {rec.sample_rate} Hz"
        )

    corrected = rec.data - baseline.data.mean(axis=0)
    if BaselineMode(mode) == BaselineMode.ZSCORE:
        spread = baseline.data.std(axis=0)
        if np.any(spread == 0):
            flat = [rec.channels[i] for i in np.flatnonzero(spread == 0)]
            raise DegenerateDataError(f"baseline channels {flat} are constant; cannot z-score")
        corrected = corrected / spread
    return rec.with_data(corrected)


def preprocess_recording(
    rec: Recording,
    bandpass: Optional[Sequence[float]] = (0.1, 45.0),
    bandpass_order: int = DEFAULT_BANDPASS_ORDER,
    notch: Optional[float] = 50.0,
    reference_labels: Sequence[str] = (),
    baseline: Optional[Recording] = None,
    baseline_mode: BaselineMode = BaselineMode.MEAN,
) -> Recording:
    """Band-pass, notch, re-reference and baseline-correct, skipping disabled steps."""
    out = rec
    if bandpass is not None:
        out = bandpass_filter(out, bandpass[0], bandpass[1], bandpass_order)
    if notch is not None:
        out = notch_filter(out, notch)
    if reference_labels:
        out = rereference_average(out, reference_labels)
    if baseline is not None:
        # Baseline passes through the same filters before correction.
        reference = baseline
        if bandpass is not None:
            reference = bandpass_filter(reference, bandpass[0], bandpass[1], bandpass_order)
        if notch is not None:
            reference = notch_filter(reference, notch)
        if reference_labels:
            reference = rereference_average(reference, reference_labels)
        out = baseline_correct(out, reference, baseline_mode)
    return out
