"""
Synthetic recordings with known ground truth
Stable VAR(p) processes and delayed coupled sinusoids, deterministic given a seed.
"""

from typing import Optional, Sequence

import numpy as np
from loguru import logger

from app.exceptions import InvalidParameterError, UnstableModelError
from .models import Recording, Session, VarGroundTruth

# Spectral radius at or above this is treated as unstable.
STABILITY_MARGIN = 1e-9
DEFAULT_BURN_IN = 1000


def default_labels(n_channels: int) -> tuple:
    return tuple(f"ch{i + 1:02d}" for i in range(n_channels))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def companion_matrix(coefficients: Sequence[np.ndarray]) -> np.ndarray:
    """(n*p) x (n*p) companion form of x_t = sum_r B(r) x_{t-r} + w_t."""
    coefficients = [np.asarray(c, dtype=float) for c in coefficients]
    if not coefficients:
        raise InvalidParameterError("at least one coefficient matrix is required")
    n = coefficients[0].shape[0]
    for lag, matrix in enumerate(coefficients, start=1):
        if matrix.ndim != 2 or matrix.shape != (n, n):
            raise InvalidParameterError(
                f"B({lag}) has shape {matrix.shape}; all matrices must be square {n}x{n}"
            )
    p = len(coefficients)
    companion = np.zeros((n * p, n * p))
    companion[:n, :] = np.hstack(coefficients)
    if p > 1:
        companion[n:, :-n] = np.eye(n * (p - 1))
    return companion


def check_var_stability(coefficients: Sequence[np.ndarray]) -> float:
    """Spectral radius of the companion matrix."""
    eigenvalues = np.linalg.eigvals(companion_matrix(coefficients))
    return float(np.max(np.abs(eigenvalues)))


def simulate_var(
    coefficients: Sequence[np.ndarray],
    noise_covariance: np.ndarray,
    n_samples: int,
    seed: int,
    burn_in: int = DEFAULT_BURN_IN,
) -> np.ndarray:
    """
    Draw n_samples x n values from a stable VAR recursion started at zero.

    The first ``burn_in`` samples are discarded. Innovations are
    ``standard_normal`` draws of a PCG64 generator seeded with ``seed``,
    coloured by the Cholesky factor of ``noise_covariance``.
    """
    radius = check_var_stability(coefficients)
    if radius >= 1.0 - STABILITY_MARGIN:
        raise UnstableModelError(radius)

    coefficients = [np.asarray(c, dtype=float) for c in coefficients]
    p = len(coefficients)
    n = coefficients[0].shape[0]
    if n_samples < 10 * p:
        raise InvalidParameterError(f"n_samples must be at least 10*p = {10 * p}, got {n_samples}")
    if burn_in < 0:
        raise InvalidParameterError("burn_in must be non-negative")

    chol = np.linalg.cholesky(np.asarray(noise_covariance, dtype=float))
    total = burn_in + n_samples
    innovations = _rng(seed).standard_normal((total, n)) @ chol.T

    stacked = np.hstack(coefficients)  # n x (n*p), lag-major
    x = np.zeros((total + p, n))
    for t in range(p, total + p):
        history = x[t - p:t][::-1].reshape(-1)  # x_{t-1}, ..., x_{t-p}
        x[t] = stacked @ history + innovations[t - p]
    return x[p + burn_in:]


def generate_var(
    gt: VarGroundTruth,
    n_samples: int,
    burn_in: int = DEFAULT_BURN_IN,
    sample_rate: float = 256.0,
    channels: Optional[Sequence[str]] = None,
    subject_id: str = "synthetic",
    session: Session = Session.PRE,
) -> Recording:
    """Recording of ``n_samples`` rows drawn from the ground-truth VAR."""
    data = simulate_var(gt.coefficients, gt.noise_covariance, n_samples, gt.seed, burn_in)
    logger.debug(f"Simulated VAR({gt.order}) with {gt.n_channels} channels, {n_samples} samples")
    return Recording(
        sample_rate=sample_rate,
        channels=tuple(channels) if channels is not None else default_labels(gt.n_channels),
        data=data,
        subject_id=subject_id,
        session=session,
    )


def generate_coupled_sinusoids(
    f0: float,
    snr: float,
    lag: int,
    n_samples: int,
    fs: float,
    seed: int,
    channels: Sequence[str] = ("x", "y"),
) -> Recording:
    """
    Two channels sharing a unit-amplitude sinusoid at ``f0``.

    Channel 2 carries channel 1's sinusoid delayed by ``lag`` samples. Each
    channel gets independent white noise with variance ``0.5 / snr`` (signal
    power over noise power); ``snr = inf`` gives noiseless channels.
    """
    if not 0 < f0 < fs / 2:
        raise InvalidParameterError(f"f0 must lie in (0, fs/2) = (0, {fs / 2}), got {f0}")
    if snr <= 0:
        raise InvalidParameterError(f"snr must be positive, got {snr}")
    if lag < 0:
        raise InvalidParameterError(f"lag must be non-negative, got {lag}")

    rng = _rng(seed)
    phase = rng.uniform(0.0, 2 * np.pi)
    t = np.arange(n_samples) / fs
    lead = np.sin(2 * np.pi * f0 * t + phase)
    delayed = np.sin(2 * np.pi * f0 * (t - lag / fs) + phase)

    noise_sd = 0.0 if np.isinf(snr) else np.sqrt(0.5 / snr)
    noise = rng.standard_normal((n_samples, 2)) * noise_sd
    data = np.column_stack([lead, delayed]) + noise
    return Recording(sample_rate=fs, channels=tuple(channels), data=data, subject_id="synthetic")
