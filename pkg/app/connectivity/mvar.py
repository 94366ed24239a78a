"""
MVAR modelling and partial directed coherence
Least-squares fits of x_t = sum_r B(r) x_{t-r} + w_t, information-criterion
order selection and the column-normalized PDC of a fitted model.
"""

from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import linalg

from app.config import settings
from app.exceptions import DegenerateDataError, InvalidParameterError
from app.signal_io import Recording, VarGroundTruth, check_var_stability
from .models import ConnectivityMatrix, Metric, MvarModel

SAMPLES_PER_PARAMETER = 10
MIN_PDC_FREQS = 16
CRITERIA = ("aic", "hq", "bic")


def _lagged_design(data: np.ndarray, order: int, start: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Targets x_t for t >= start and regressors [x_{t-1}, ..., x_{t-order}].

    Regressor columns are lag-major so ``coef.T[:, (r-1)*n:r*n]`` is B(r).
    """
    n_samples = data.shape[0]
    targets = data[start:]
    regressors = np.hstack([data[start - lag:n_samples - lag] for lag in range(1, order + 1)])
    return targets, regressors


def _check_samples(n_samples: int, n_channels: int, order: int) -> None:
    if order < 1:
        raise InvalidParameterError(f"model order must be at least 1, got {order}")
    required = SAMPLES_PER_PARAMETER * n_channels * order
    if n_samples < required:
        raise InvalidParameterError(
            f"an order-{order} fit on {n_channels} channels needs {required} samples, got {n_samples}"
        )


def _solve(targets: np.ndarray, regressors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    coef, _, rank, _ = linalg.lstsq(regressors, targets)
    if rank < regressors.shape[1]:
        raise DegenerateDataError(
            f"rank-deficient lag regression ({rank} < {regressors.shape[1]}); "
            "a channel is constant or linearly dependent"
        )
    residuals = targets - regressors @ coef
    covariance = residuals.T @ residuals / residuals.shape[0]
    return coef, (covariance + covariance.T) / 2


def fit_mvar_array(data: np.ndarray, order: int, channels: Sequence[str] = ()) -> MvarModel:
    """Least-squares MVAR fit on a samples x channels array (demeaned first)."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise InvalidParameterError("MVAR data must be samples x channels")
    n_samples, n_channels = data.shape
    _check_samples(n_samples, n_channels, order)

    centred = data - data.mean(axis=0)
    targets, regressors = _lagged_design(centred, order, order)
    coef, covariance = _solve(targets, regressors)
    stacked = coef.T  # n x (n*p)
    coefficients = np.stack([stacked[:, (r * n_channels):((r + 1) * n_channels)]
                             for r in range(order)])

    radius = check_var_stability(list(coefficients))
    if radius >= 1.0:
        logger.warning(f"MVAR({order}) fit is unstable: spectral radius {radius:.4f}")
    return MvarModel(
        coefficients=coefficients,
        noise_covariance=covariance,
        n_samples_fit=targets.shape[0],
        channels=tuple(channels),
        spectral_radius=radius,
    )


def fit_mvar(rec: Recording, order: int) -> MvarModel:
    """Fit an order-p MVAR model to a recording."""
    return fit_mvar_array(rec.data, order, rec.channels)


def model_from_ground_truth(gt: VarGroundTruth, channels: Sequence[str] = ()) -> MvarModel:
    """Wrap the generating coefficients of a simulated VAR for analytic PDC."""
    return MvarModel(
        coefficients=np.stack(gt.coefficients),
        noise_covariance=gt.noise_covariance,
        n_samples_fit=0,
        channels=tuple(channels),
        spectral_radius=check_var_stability(gt.coefficients),
    )


def _penalty(criterion: str, n_obs: int) -> float:
    if criterion == "aic":
        return 2.0
    if criterion == "hq":
        return 2.0 * np.log(np.log(n_obs))
    if criterion == "bic":
        return float(np.log(n_obs))
    raise InvalidParameterError(f"unknown order criterion '{criterion}', expected one of {CRITERIA}")


def order_criteria(data: np.ndarray, p_max: int, criterion: str = "aic") -> np.ndarray:
    """
    Criterion value for p = 1..p_max on a common estimation sample.

    Every candidate is fitted on the rows t >= p_max so the values are
    comparable; the value is ln det(Sigma_p) + penalty * p * n^2 / N.
    """
    data = np.asarray(data, dtype=float)
    n_samples, n_channels = data.shape
    _check_samples(n_samples, n_channels, p_max)
    penalty = _penalty(criterion, n_samples - p_max)

    centred = data - data.mean(axis=0)
    targets, regressors = _lagged_design(centred, p_max, p_max)
    n_obs = targets.shape[0]
    values = np.empty(p_max)
    for p in range(1, p_max + 1):
        _, covariance = _solve(targets, regressors[:, :p * n_channels])
        sign, logdet = np.linalg.slogdet(covariance)
        if sign <= 0:
            raise DegenerateDataError(f"singular residual covariance at order {p}")
        values[p - 1] = logdet + penalty * p * n_channels ** 2 / n_obs
    return values


def select_order(rec: Recording, p_max: Optional[int] = None, criterion: str = "aic") -> int:
    """Order in [1, p_max] minimizing the criterion; ties go to the smaller order."""
    if p_max is None:
        p_max = settings.MVAR_MAX_ORDER
    if p_max < 1:
        raise InvalidParameterError(f"p_max must be at least 1, got {p_max}")
    values = order_criteria(rec.data, p_max, criterion)
    order = int(np.argmin(values)) + 1
    logger.debug(f"{criterion.upper()} order for {rec.subject_id}/{rec.session.value}: {order}")
    return order


# ============= PARTIAL DIRECTED COHERENCE =============

def frequency_matrix(model: MvarModel, freqs: Sequence[float]) -> np.ndarray:
    """A(f) = I - sum_r B(r) exp(-i 2 pi f r) for normalized frequencies f."""
    freqs = np.asarray(freqs, dtype=float)
    lags = np.arange(1, model.order + 1)
    phases = np.exp(-2j * np.pi * freqs[:, None] * lags[None, :])  # F x p
    transfer = np.einsum("fr,rij->fij", phases, model.coefficients)
    return np.eye(model.n_channels)[None, :, :] - transfer


def pdc_spectrum(model: MvarModel, freqs: Sequence[float]) -> np.ndarray:
    """
    Complex PDC, F x n x n; entry (i, j) is the influence of channel j on i.

    Every column of every frequency slice has unit Euclidean norm.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if freqs.size == 0:
        raise InvalidParameterError("the frequency list is empty")
    if np.any(freqs < 0) or np.any(freqs > 0.5):
        raise InvalidParameterError("normalized frequencies must lie in [0, 0.5]")

    a_bar = frequency_matrix(model, freqs)
    norms = np.sqrt(np.sum(np.abs(a_bar) ** 2, axis=1, keepdims=True))  # F x 1 x n
    if np.any(norms == 0):
        raise DegenerateDataError("zero column norm in the frequency-domain coefficient matrix")
    return a_bar / norms


def pdc_matrix(model: MvarModel, band: Optional[Tuple[float, float]] = None,
               fs: float = 256.0, n_freqs: int = MIN_PDC_FREQS) -> ConnectivityMatrix:
    """|PDC| averaged over evenly spaced band frequencies."""
    low, high = band or settings.band
    if not 0 <= low < high:
        raise InvalidParameterError(f"band must satisfy 0 <= low < high, got {(low, high)}")
    if high > fs / 2:
        raise InvalidParameterError(f"band upper edge {high} Hz exceeds Nyquist {fs / 2} Hz")
    n_freqs = max(int(n_freqs), MIN_PDC_FREQS)

    freqs = np.linspace(low, high, n_freqs) / fs
    values = np.abs(pdc_spectrum(model, freqs)).mean(axis=0)
    labels = model.channels or tuple(str(i) for i in range(model.n_channels))
    return ConnectivityMatrix(
        metric=Metric.PDC,
        band=(low, high),
        values=np.clip(values, 0.0, 1.0),
        channel_labels=labels,
    )
