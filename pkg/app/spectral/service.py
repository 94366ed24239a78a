"""
Spectral estimators
Welch auto/cross-spectral density matrices and the analytic Morlet continuous
wavelet transform (Fourier-domain implementation).
"""

from typing import Optional, Sequence

import numpy as np
from loguru import logger
from scipy import fft, signal

from app.config import settings
from app.exceptions import InvalidParameterError
from app.signal_io import Recording
from .models import CrossSpectralDensity, WaveletTransform

MIN_WINDOW_LEN = 8
MIN_OMEGA0 = 5.0


def welch_csd(rec: Recording, window_len: Optional[int] = None,
              overlap: Optional[float] = None) -> CrossSpectralDensity:
    """
    Hann-windowed, overlapped, segment-averaged cross-spectral matrices.

    Segments are mean-detrended; one-sided density scaling so the integral of
    each auto-spectrum over frequency approximates the channel variance.
    """
    if window_len is None:
        window_len = int(round(settings.WELCH_WINDOW_SECONDS * rec.sample_rate))
    if overlap is None:
        overlap = settings.WELCH_OVERLAP

    if window_len < MIN_WINDOW_LEN:
        raise InvalidParameterError(f"window_len must be at least {MIN_WINDOW_LEN}, got {window_len}")
    if not 0 <= overlap < 1:
        raise InvalidParameterError(f"overlap must lie in [0, 1), got {overlap}")
    if window_len > rec.n_samples:
        raise InvalidParameterError(
            f"window_len {window_len} exceeds the recording length {rec.n_samples}"
        )

    noverlap = int(overlap * window_len)
    n_segments = (rec.n_samples - window_len) // (window_len - noverlap) + 1
    if n_segments < 2:
        raise InvalidParameterError(
            f"{rec.n_samples} samples give only {n_segments} segment(s) of {window_len}; need 2"
        )

    channels_first = rec.data.T
    freqs, spectra = signal.csd(
        channels_first[:, None, :], channels_first[None, :, :],
        fs=rec.sample_rate, window="hann", nperseg=window_len, noverlap=noverlap,
        detrend="constant", scaling="density", axis=-1,
    )
    matrices = np.moveaxis(spectra, -1, 0)  # freqs x a x b, conj(X_a) X_b

    logger.debug(f"Welch CSD: {n_segments} segments of {window_len} samples, "
                 f"{rec.n_channels} channels")
    return CrossSpectralDensity(
        freqs=freqs,
        matrices=matrices,
        n_segments=n_segments,
        window_len=window_len,
        sample_rate=rec.sample_rate,
        channels=rec.channels,
    )


def morlet_scale(freq: np.ndarray, omega0: float) -> np.ndarray:
    """Morlet scale (seconds) whose Fourier period is 1/freq."""
    return (omega0 + np.sqrt(2.0 + omega0 ** 2)) / (4.0 * np.pi * np.asarray(freq, dtype=float))


def morlet_cwt(signal_values: np.ndarray, fs: float, freqs: Sequence[float],
               omega0: Optional[float] = None) -> WaveletTransform:
    """
    Continuous wavelet transform with the analytic Morlet wavelet.

    The signal is zero-padded to at least twice its length before the
    Fourier-domain convolution. ``coi_mask`` marks coefficients farther than
    one e-folding time (sqrt(2) * scale) from either edge.
    """
    if omega0 is None:
        omega0 = settings.WAVELET_OMEGA0
    x = np.asarray(signal_values, dtype=float)
    if x.ndim != 1:
        raise InvalidParameterError("morlet_cwt expects a single channel")
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0:
        raise InvalidParameterError("the frequency list is empty")
    if np.any(freqs <= 0) or np.any(freqs >= fs / 2):
        raise InvalidParameterError(f"wavelet frequencies must lie in (0, {fs / 2}) Hz")
    if np.any(np.diff(freqs) <= 0):
        raise InvalidParameterError("wavelet frequencies must be strictly ascending")
    if omega0 < MIN_OMEGA0:
        raise InvalidParameterError(f"omega0 must be at least {MIN_OMEGA0}, got {omega0}")

    n = x.size
    dt = 1.0 / fs
    n_fft = fft.next_fast_len(2 * n)
    spectrum = fft.fft(x, n=n_fft)
    omega = 2.0 * np.pi * fft.fftfreq(n_fft, d=dt)

    scales = morlet_scale(freqs, omega0)
    coefficients = np.empty((freqs.size, n), dtype=complex)
    for row, scale in enumerate(scales):
        daughter = np.where(
            omega > 0,
            np.pi ** -0.25 * np.sqrt(2.0 * np.pi * scale / dt)
            * np.exp(-0.5 * (scale * omega - omega0) ** 2),
            0.0,
        )
        coefficients[row] = fft.ifft(spectrum * daughter)[:n]

    times = np.arange(n) * dt
    e_folding = np.sqrt(2.0) * scales[:, None]
    coi_mask = (times[None, :] >= e_folding) & ((times[-1] - times)[None, :] >= e_folding)
    return WaveletTransform(
        freqs=freqs,
        times=times,
        coefficients=coefficients,
        scales=scales,
        coi_mask=coi_mask,
        omega0=float(omega0),
        sample_rate=float(fs),
    )
