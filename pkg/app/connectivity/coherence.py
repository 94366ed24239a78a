"""
Coherence estimators
Magnitude-squared coherence from Welch cross-spectra and time-frequency
wavelet coherence from smoothed Morlet cross-spectra, each reduced to a
band-averaged symmetric matrix.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from loguru import logger
from scipy.ndimage import uniform_filter1d

from app.config import settings
from app.exceptions import DegenerateDataError, InvalidParameterError, SchemaMismatchError
from app.signal_io import Recording
from app.spectral import CrossSpectralDensity, WaveletTransform, morlet_cwt
from .models import ConnectivityMatrix, Metric

MIN_SMOOTHING_SAMPLES = 3


def _check_band(band: Tuple[float, float]) -> Tuple[float, float]:
    low, high = float(band[0]), float(band[1])
    if not 0 <= low < high:
        raise InvalidParameterError(f"band must satisfy 0 <= low < high, got {band}")
    return low, high


# ============= MAGNITUDE-SQUARED COHERENCE =============

def msc_spectrum(csd: CrossSpectralDensity, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """freqs x n x n magnitude-squared coherence |S_ab|^2 / (S_aa * S_bb), optionally masked."""
    auto, cross = csd.auto_spectra(), csd.matrices
    if mask is not None:
        auto, cross = auto[mask], cross[mask]
    if np.any(auto <= 0):
        bad = sorted({csd.channels[i] if csd.channels else str(i)
                      for i in np.flatnonzero(np.any(auto <= 0, axis=0))})
        raise DegenerateDataError(f"zero auto-spectrum for channel(s) {bad}")
    return np.abs(cross) ** 2 / (auto[:, :, None] * auto[:, None, :])


def msc_matrix(csd: CrossSpectralDensity, band: Optional[Tuple[float, float]] = None) -> ConnectivityMatrix:
    """Band-mean magnitude-squared coherence."""
    low, high = _check_band(band or settings.band)
    mask = csd.band_mask((low, high))
    if not np.any(mask):
        raise InvalidParameterError(f"band ({low}, {high}) Hz contains no CSD frequency")

    values = np.clip(msc_spectrum(csd, mask).mean(axis=0), 0.0, 1.0)
    values = (values + values.T) / 2
    np.fill_diagonal(values, 1.0)

    labels = csd.channels or tuple(str(i) for i in range(csd.n_channels))
    return ConnectivityMatrix(metric=Metric.MSC, band=(low, high), values=values, channel_labels=labels)


# ============= WAVELET COHERENCE =============

@dataclass(frozen=True)
class WaveletCoherence:
    """Time-frequency coherence; ``interior`` excludes cone-of-influence and smoothing edges."""

    freqs: np.ndarray
    times: np.ndarray
    values: np.ndarray
    interior: np.ndarray


def smoothing_widths(freqs: np.ndarray, sample_rate: float, cycles: float) -> np.ndarray:
    """Boxcar width in samples per frequency row: ``cycles / f`` seconds."""
    return np.rint(cycles / np.asarray(freqs) * sample_rate).astype(int)


def _smooth(values: np.ndarray, width: int) -> np.ndarray:
    if np.iscomplexobj(values):
        return uniform_filter1d(values.real, width) + 1j * uniform_filter1d(values.imag, width)
    return uniform_filter1d(values, width)


def wavelet_coherence(wt_a: WaveletTransform, wt_b: WaveletTransform,
                      smoothing_cycles: Optional[float] = None) -> WaveletCoherence:
    """
    |S(W_a W_b*)| / sqrt(S(|W_a|^2) S(|W_b|^2)) with S a per-row time boxcar.

    Rows whose boxcar would be shorter than three samples are rejected.
    Where both smoothed auto-spectra vanish the coherence is reported as 0.
    """
    if smoothing_cycles is None:
        smoothing_cycles = settings.WAVELET_SMOOTHING_CYCLES
    if not wt_a.same_grid(wt_b):
        raise SchemaMismatchError("wavelet transforms do not share a frequency/time grid")

    widths = smoothing_widths(wt_a.freqs, wt_a.sample_rate, smoothing_cycles)
    if np.any(widths < MIN_SMOOTHING_SAMPLES):
        worst = wt_a.freqs[int(np.argmin(widths))]
        raise InvalidParameterError(
            f"smoothing window at {worst:.2f} Hz spans {int(widths.min())} samples; "
            f"at least {MIN_SMOOTHING_SAMPLES} required"
        )

    a, b = wt_a.coefficients, wt_b.coefficients
    n_times = a.shape[1]
    values = np.zeros(a.shape)
    interior = np.array(wt_a.coi_mask & wt_b.coi_mask)
    columns = np.arange(n_times)
    for row, width in enumerate(widths):
        cross = _smooth(a[row] * np.conj(b[row]), width)
        power_a = _smooth(np.abs(a[row]) ** 2, width)
        power_b = _smooth(np.abs(b[row]) ** 2, width)
        denominator = np.sqrt(np.maximum(power_a, 0.0) * np.maximum(power_b, 0.0))
        values[row] = np.divide(np.abs(cross), denominator,
                                out=np.zeros(n_times), where=denominator > 0)
        half = width // 2
        interior[row] &= (columns >= half) & (columns < n_times - half)
    return WaveletCoherence(freqs=wt_a.freqs, times=wt_a.times, values=values, interior=interior)


def band_frequencies(band: Tuple[float, float], step: float = 1.0) -> np.ndarray:
    """Wavelet rows spanning the band at ``step`` Hz."""
    low, high = band
    return np.arange(low, high + step / 2, step)


def wc_matrix(rec: Recording, band: Optional[Tuple[float, float]] = None,
              omega0: Optional[float] = None, smoothing_cycles: Optional[float] = None,
              freq_step: float = 1.0) -> ConnectivityMatrix:
    """Pairwise wavelet coherence averaged over band rows and interior columns."""
    low, high = _check_band(band or settings.band)
    freqs = band_frequencies((low, high), freq_step)
    transforms = [morlet_cwt(rec.data[:, ch], rec.sample_rate, freqs, omega0)
                  for ch in range(rec.n_channels)]

    n = rec.n_channels
    values = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            coherence = wavelet_coherence(transforms[i], transforms[j], smoothing_cycles)
            if not np.any(coherence.interior):
                raise InvalidParameterError(
                    f"recording of {rec.duration:.2f} s leaves no interior wavelet coefficients"
                )
            values[i, j] = values[j, i] = coherence.values[coherence.interior].mean()

    logger.debug(f"WC matrix for {rec.subject_id}/{rec.session.value}: {n} channels, "
                 f"{freqs.size} rows")
    return ConnectivityMatrix(
        metric=Metric.WC,
        band=(low, high),
        values=np.clip(values, 0.0, 1.0),
        channel_labels=rec.channels,
        subject_id=rec.subject_id,
        session=rec.session,
    )
