"""Connectivity module"""
from .coherence import (
    WaveletCoherence,
    band_frequencies,
    msc_matrix,
    msc_spectrum,
    wavelet_coherence,
    wc_matrix,
)
from .models import ConnectivityMatrix, MatrixSidecar, Metric, MvarModel
from .mvar import (
    fit_mvar,
    fit_mvar_array,
    frequency_matrix,
    model_from_ground_truth,
    order_criteria,
    pdc_matrix,
    pdc_spectrum,
    select_order,
)
from .service import compute_connectivity, load_matrix, save_matrix

__all__ = [
    "ConnectivityMatrix",
    "MatrixSidecar",
    "Metric",
    "MvarModel",
    "WaveletCoherence",
    "band_frequencies",
    "msc_matrix",
    "msc_spectrum",
    "wavelet_coherence",
    "wc_matrix",
    "fit_mvar",
    "fit_mvar_array",
    "frequency_matrix",
    "model_from_ground_truth",
    "order_criteria",
    "pdc_matrix",
    "pdc_spectrum",
    "select_order",
    "compute_connectivity",
    "load_matrix",
    "save_matrix",
]
