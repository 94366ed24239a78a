"""
Connectivity data model
Fitted MVAR models and band-aggregated n x n connectivity matrices.
"""

import enum
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from app.exceptions import InvalidParameterError
from app.signal_io import Session

SYMMETRY_TOL = 1e-10
RANGE_TOL = 1e-9


class Metric(str, enum.Enum):
    MSC = "msc"
    WC = "wc"
    PDC = "pdc"


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MvarModel:
    """
    Least-squares MVAR(p) fit.

    ``coefficients[r - 1][i, j]`` is the influence of channel j at lag r on
    channel i. ``stable`` is False when the companion spectral radius is >= 1;
    such fits are flagged rather than rejected.
    """

    coefficients: np.ndarray  # p x n x n
    noise_covariance: np.ndarray
    n_samples_fit: int
    channels: Tuple[str, ...] = ()
    spectral_radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen(self.coefficients))
        object.__setattr__(self, "noise_covariance", _frozen(self.noise_covariance))
        object.__setattr__(self, "channels", tuple(self.channels))

        if self.coefficients.ndim != 3 or self.coefficients.shape[1] != self.coefficients.shape[2]:
            raise InvalidParameterError(f"coefficients must be p x n x n, got {self.coefficients.shape}")
        if self.coefficients.shape[0] < 1:
            raise InvalidParameterError("an MVAR model needs at least one lag")
        n = self.coefficients.shape[1]
        cov = self.noise_covariance
        if cov.shape != (n, n):
            raise InvalidParameterError(f"noise covariance must be {n}x{n}, got {cov.shape}")
        scale = max(float(np.max(np.abs(cov))), 1.0)
        if not np.allclose(cov, cov.T, atol=SYMMETRY_TOL * scale, rtol=0.0):
            raise InvalidParameterError("noise covariance must be symmetric")
        if np.min(np.linalg.eigvalsh((cov + cov.T) / 2)) < -SYMMETRY_TOL * scale:
            raise InvalidParameterError("noise covariance must be positive semi-definite")
        if self.channels and len(self.channels) != n:
            raise InvalidParameterError("channel labels do not match the model size")

    @property
    def order(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_channels(self) -> int:
        return self.coefficients.shape[1]

    @property
    def stable(self) -> bool:
        return self.spectral_radius < 1.0


@dataclass(frozen=True)
class ConnectivityMatrix:
    """One metric's n x n matrix for one frequency band."""

    metric: Metric
    band: Tuple[float, float]
    values: np.ndarray
    channel_labels: Tuple[str, ...]
    subject_id: Optional[str] = None
    session: Optional[Session] = None

    def __post_init__(self):
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "band", (float(self.band[0]), float(self.band[1])))
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "channel_labels", tuple(self.channel_labels))
        if self.session is not None:
            object.__setattr__(self, "session", Session(self.session))

        values = self.values
        n = len(self.channel_labels)
        if values.shape != (n, n):
            raise InvalidParameterError(f"matrix shape {values.shape} does not match {n} labels")
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("connectivity values must be finite")
        if np.min(values) < -RANGE_TOL or np.max(values) > 1 + RANGE_TOL:
            raise InvalidParameterError("connectivity values must lie in [0, 1]")
        if self.metric in (Metric.MSC, Metric.WC):
            if not np.allclose(values, values.T, atol=SYMMETRY_TOL, rtol=0.0):
                raise InvalidParameterError(f"{self.metric.value} matrices must be symmetric")

    @property
    def n_channels(self) -> int:
        return len(self.channel_labels)


# ============= ON-DISK SIDECAR =============

class MatrixSidecar(BaseModel):
    metric: Metric
    band: Tuple[float, float]
    channel_labels: List[str]
    subject_id: Optional[str] = None
    session: Optional[Session] = None
