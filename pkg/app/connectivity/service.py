"""
Connectivity Service
Metric dispatch for a single recording and CSV + JSON sidecar persistence of
connectivity matrices.
"""

import csv
import dataclasses
import json
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError

from app.exceptions import RecordingFormatError
from app.signal_io import Recording, sidecar_path
from app.spectral import welch_csd
from .coherence import msc_matrix, wc_matrix
from .models import ConnectivityMatrix, MatrixSidecar, Metric
from .mvar import fit_mvar, pdc_matrix, select_order

PathLike = Union[str, Path]


def compute_connectivity(
    rec: Recording,
    metric: Union[Metric, str],
    band: Optional[Tuple[float, float]] = None,
    *,
    window_len: Optional[int] = None,
    overlap: Optional[float] = None,
    omega0: Optional[float] = None,
    smoothing_cycles: Optional[float] = None,
    mvar_order: Optional[int] = None,
    max_order: Optional[int] = None,
    order_criterion: str = "aic",
) -> ConnectivityMatrix:
    """Band-aggregated connectivity matrix of one recording for one metric."""
    metric = Metric(metric)
    if metric is Metric.MSC:
        matrix = msc_matrix(welch_csd(rec, window_len, overlap), band)
    elif metric is Metric.WC:
        matrix = wc_matrix(rec, band, omega0=omega0, smoothing_cycles=smoothing_cycles)
    else:
        order = mvar_order or select_order(rec, max_order, order_criterion)
        model = fit_mvar(rec, order)
        if not model.stable:
            logger.warning(f"{rec.subject_id}/{rec.session.value}: PDC from an unstable MVAR({order}) fit")
        matrix = pdc_matrix(model, band, rec.sample_rate)
    return dataclasses.replace(matrix, subject_id=rec.subject_id, session=rec.session)


# ============= PERSISTENCE =============

def save_matrix(matrix: ConnectivityMatrix, path: PathLike) -> None:
    """n x n values (no header) plus ``<name>.meta.json``."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for row in matrix.values:
            writer.writerow([format(v, ".17g") for v in row])

    meta = MatrixSidecar(
        metric=matrix.metric,
        band=matrix.band,
        channel_labels=list(matrix.channel_labels),
        subject_id=matrix.subject_id,
        session=matrix.session,
    )
    sidecar_path(path).write_text(meta.model_dump_json(indent=2) + "\n")


def load_matrix(path: PathLike) -> ConnectivityMatrix:
    """Read a matrix written by :func:`save_matrix`."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"matrix file not found: {path}")
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise RecordingFormatError("missing sidecar file", path=str(meta_path))
    try:
        meta = MatrixSidecar.model_validate(json.loads(meta_path.read_text()))
    except (json.JSONDecodeError, ValidationError) as e:
        raise RecordingFormatError(f"invalid matrix sidecar: {e}", path=str(meta_path)) from None

    rows = []
    with path.open(newline="") as handle:
        for row_number, row in enumerate(csv.reader(handle), start=1):
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise RecordingFormatError("not a number", path=str(path), row=row_number) from None
    n = len(meta.channel_labels)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise RecordingFormatError(f"expected a {n}x{n} matrix", path=str(path))

    return ConnectivityMatrix(
        metric=meta.metric,
        band=meta.band,
        values=np.asarray(rows),
        channel_labels=tuple(meta.channel_labels),
        subject_id=meta.subject_id,
        session=meta.session,
    )
