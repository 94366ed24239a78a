"""
Recording data model
Multichannel fixed-rate recordings and the ground truth of simulated VAR processes.
"""

import enum
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.exceptions import InvalidParameterError


class Session(str, enum.Enum):
    PRE = "pre"
    POST = "post"


def _frozen(array: np.ndarray, dtype=float) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Recording:
    """An n-channel recording; ``data`` is samples x channels."""

    sample_rate: float
    channels: Tuple[str, ...]
    data: np.ndarray
    subject_id: str = "unknown"
    session: Session = Session.PRE

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(str(c) for c in self.channels))
        object.__setattr__(self, "data", _frozen(self.data))
        object.__setattr__(self, "session", Session(self.session))

        if not np.isfinite(self.sample_rate) or self.sample_rate <= 0:
            raise InvalidParameterError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.data.ndim != 2:
            raise InvalidParameterError(f"data must be 2-D (samples x channels), got {self.data.ndim}-D")
        n_samples, n_channels = self.data.shape
        if n_channels != len(self.channels):
            raise InvalidParameterError(
                f"data has {n_channels} columns but {len(self.channels)} channel labels"
            )
        if len(set(self.channels)) != len(self.channels):
            raise InvalidParameterError("channel labels must be unique")
        if n_channels < 2 or n_samples < 2:
            raise InvalidParameterError(
                f"a recording needs at least 2 channels and 2 samples, got {n_channels}x{n_samples}"
            )
        if not np.all(np.isfinite(self.data)):
            row, col = np.argwhere(~np.isfinite(self.data))[0]
            raise InvalidParameterError(f"non-finite sample at row {row}, column {col}")

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def channel_index(self, label: str) -> int:
        try:
            return self.channels.index(label)
        except ValueError:
            raise InvalidParameterError(f"unknown channel label '{label}'") from None

    def with_data(self, data: np.ndarray) -> "Recording":
        """Copy of this recording carrying new sample values."""
        return Recording(
            sample_rate=self.sample_rate,
            channels=self.channels,
            data=data,
            subject_id=self.subject_id,
            session=self.session,
        )


@dataclass(frozen=True)
class VarGroundTruth:
    """Known coefficients B(1..p) and innovation covariance of a simulated VAR(p)."""

    coefficients: Tuple[np.ndarray, ...]
    noise_covariance: np.ndarray
    seed: int = 0

    def __post_init__(self):
        coefficients = tuple(_frozen(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "noise_covariance", _frozen(self.noise_covariance))

        if not coefficients:
            raise InvalidParameterError("a VAR model needs at least one lag")
        n = coefficients[0].shape[0]
        for lag, matrix in enumerate(coefficients, start=1):
            if matrix.shape != (n, n):
                raise InvalidParameterError(f"B({lag}) has shape {matrix.shape}, expected {(n, n)}")
        cov = self.noise_covariance
        if cov.shape != (n, n):
            raise InvalidParameterError(f"noise covariance has shape {cov.shape}, expected {(n, n)}")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=0.0):
            raise InvalidParameterError("noise covariance must be symmetric")
        if np.min(np.linalg.eigvalsh(cov)) <= 0:
            raise InvalidParameterError("noise covariance must be positive definite")

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def n_channels(self) -> int:
        return self.coefficients[0].shape[0]


# ============= ON-DISK SIDECAR =============

class RecordingSidecar(BaseModel):
    """``<name>.meta.json`` next to a recording CSV."""

    sample_rate: float = Field(gt=0)
    channels: List[str]
    subject_id: str = "unknown"
    session: Session = Session.PRE
