"""Spectral estimates shared by the connectivity metrics."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.exceptions import InvalidParameterError

HERMITIAN_RTOL = 1e-10


def _frozen(array: np.ndarray, dtype=None) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CrossSpectralDensity:
    """
    Welch cross-spectral matrices, one n x n Hermitian matrix per frequency.

    ``matrices[k, a, b]`` is the cross-spectrum of channels a and b at
    ``freqs[k]`` (density scaling, units^2/Hz).
    """

    freqs: np.ndarray
    matrices: np.ndarray
    n_segments: int
    window_len: int
    sample_rate: float
    channels: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "freqs", _frozen(self.freqs, float))
        object.__setattr__(self, "matrices", _frozen(self.matrices, complex))
        object.__setattr__(self, "channels", tuple(self.channels))

        if self.matrices.ndim != 3 or self.matrices.shape[1] != self.matrices.shape[2]:
            raise InvalidParameterError(f"CSD matrices must be (freqs, n, n), got {self.matrices.shape}")
        if self.matrices.shape[0] != self.freqs.shape[0]:
            raise InvalidParameterError("one CSD matrix is required per frequency")
        if np.any(self.freqs < 0) or np.any(self.freqs > self.sample_rate / 2):
            raise InvalidParameterError("CSD frequencies must lie within [0, fs/2]")
        scale = max(float(np.max(np.abs(self.matrices))), np.finfo(float).tiny)
        asymmetry = np.max(np.abs(self.matrices - np.conj(np.swapaxes(self.matrices, 1, 2))))
        if asymmetry > HERMITIAN_RTOL * scale:
            raise InvalidParameterError("CSD matrices are not Hermitian")
        diagonal = np.diagonal(self.matrices, axis1=1, axis2=2)
        if np.any(diagonal.real < 0):
            raise InvalidParameterError("auto-spectra must be non-negative")

    @property
    def n_channels(self) -> int:
        return self.matrices.shape[1]

    def auto_spectra(self) -> np.ndarray:
        """freqs x n real auto-spectra."""
        return np.real(np.diagonal(self.matrices, axis1=1, axis2=2))

    def band_mask(self, band: Tuple[float, float]) -> np.ndarray:
        low, high = band
        return (self.freqs >= low) & (self.freqs <= high)


@dataclass(frozen=True)
class WaveletTransform:
    """
    Analytic Morlet transform of one channel, ``coefficients`` is freqs x times.

    ``coi_mask`` is True for interior coefficients, clear of the edge-affected cone of influence.
    """

    freqs: np.ndarray
    times: np.ndarray
    coefficients: np.ndarray
    scales: np.ndarray
    coi_mask: np.ndarray
    omega0: float
    sample_rate: float

    def __post_init__(self):
        for name, dtype in (("freqs", float), ("times", float), ("coefficients", complex),
                            ("scales", float), ("coi_mask", bool)):
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype))
        if self.coefficients.shape != (self.freqs.size, self.times.size):
            raise InvalidParameterError("wavelet coefficients must be freqs x times")
        if self.coi_mask.shape != self.coefficients.shape:
            raise InvalidParameterError("cone-of-influence mask must match the coefficient grid")
        if not np.all(np.isfinite(self.coefficients)):
            raise InvalidParameterError("wavelet coefficients must be finite")
        if np.any(np.diff(self.freqs) <= 0):
            raise InvalidParameterError("wavelet frequencies must be strictly ascending")

    def same_grid(self, other: "WaveletTransform") -> bool:
        return (
            self.sample_rate == other.sample_rate
            and self.freqs.shape == other.freqs.shape
            and self.times.shape == other.times.shape
            and np.array_equal(self.freqs, other.freqs)
            and np.array_equal(self.times, other.times)
        )
