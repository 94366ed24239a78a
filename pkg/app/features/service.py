"""
Feature Service
Pre/post connectivity change, adjacency flattening, dataset assembly and
dataset / behaviour file I/O.
"""

import csv
import json
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError

from app.connectivity import ConnectivityMatrix
from app.exceptions import InvalidParameterError, RecordingFormatError, SchemaMismatchError
from .models import (
    BehaviourRecord,
    BinningSchema,
    ClassBinning,
    Dataset,
    DatasetSchema,
    FeatureId,
    FeatureVector,
)

PathLike = Union[str, Path]
DELTA_MODES = ("absolute", "signed")


def connectivity_delta(pre: ConnectivityMatrix, post: ConnectivityMatrix,
                       mode: str = "absolute") -> np.ndarray:
    """Elementwise |post - pre| (``signed`` gives post - pre)."""
    if mode not in DELTA_MODES:
        raise InvalidParameterError(f"delta mode must be one of {DELTA_MODES}, got '{mode}'")
    if pre.metric != post.metric:
        raise SchemaMismatchError(f"metric mismatch: {pre.metric.value} vs {post.metric.value}")
    if pre.band != post.band:
        raise SchemaMismatchError(f"band mismatch: {pre.band} vs {post.band}")
    if pre.channel_labels != post.channel_labels:
        raise SchemaMismatchError("channel labels of the pre and post matrices differ")
    difference = post.values - pre.values
    return np.abs(difference) if mode == "absolute" else difference


def flatten(matrix: Union[ConnectivityMatrix, np.ndarray], metric: Optional[str] = None,
            channel_labels: Optional[Sequence[str]] = None) -> FeatureVector:
    """
    Row-major flattening of an n x n matrix.

    Entry (i, j) becomes feature (metric, source=label j, target=label i).
    """
    if isinstance(matrix, ConnectivityMatrix):
        metric = metric or matrix.metric.value
        channel_labels = channel_labels or matrix.channel_labels
        values = matrix.values
    else:
        values = np.asarray(matrix, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise InvalidParameterError(f"flatten expects a square matrix, got shape {values.shape}")
    n = values.shape[0]
    labels = tuple(channel_labels) if channel_labels is not None else tuple(str(i) for i in range(n))
    if len(labels) != n:
        raise SchemaMismatchError(f"{len(labels)} labels for a {n}x{n} matrix")
    metric = str(getattr(metric, "value", metric or "feature"))
    ids = tuple(FeatureId(metric, labels[j], labels[i]) for i in range(n) for j in range(n))
    return FeatureVector(values=values.reshape(-1), feature_ids=ids)


def build_dataset(
    pairs: Dict[str, Tuple[ConnectivityMatrix, ConnectivityMatrix]],
    labels: Dict[str, str],
    delta_mode: str = "absolute",
    binning: Optional[ClassBinning] = None,
) -> Dataset:
    """One row per subject (sorted by id) from its pre/post matrix pair."""
    missing = sorted(set(pairs) - set(labels))
    if missing:
        raise SchemaMismatchError(f"no label for subject(s) {missing}")
    subject_ids = sorted(pairs)
    rows = []
    for subject_id in subject_ids:
        pre, post = pairs[subject_id]
        vector = flatten(connectivity_delta(pre, post, delta_mode), pre.metric.value, pre.channel_labels)
        rows.append((vector, labels[subject_id]))
    dataset = Dataset.from_vectors(rows, subject_ids=subject_ids, binning=binning)
    metric, band = pairs[subject_ids[0]][0].metric.value, pairs[subject_ids[0]][0].band
    provenance = {"metric": metric, "band": f"{band[0]:g}-{band[1]:g}", "delta_mode": delta_mode}
    logger.debug(f"Dataset for {metric}: {dataset.n_rows} subjects x {dataset.n_features} features")
    return Dataset(
        features=dataset.features,
        labels=dataset.labels,
        feature_ids=dataset.feature_ids,
        subject_ids=dataset.subject_ids,
        binning=binning,
        provenance=provenance,
    )


# ============= DATASET FILES =============

def schema_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.schema.json")


def save_dataset(dataset: Dataset, path: PathLike) -> None:
    """CSV (subject_id, feature columns, label) plus ``<name>.schema.json``."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["subject_id"] + [str(f) for f in dataset.feature_ids] + ["label"])
        for subject_id, row, label in zip(dataset.subject_ids, dataset.features, dataset.labels):
            writer.writerow([subject_id] + [format(v, ".17g") for v in row] + [label])

    binning = dataset.binning
    schema = DatasetSchema(
        feature_ids=[str(f) for f in dataset.feature_ids],
        binning=BinningSchema(mu=binning.mu, sigma=binning.sigma) if binning else None,
        provenance=dataset.provenance,
    )
    schema_path(path).write_text(schema.model_dump_json(indent=2) + "\n")


def load_dataset(path: PathLike) -> Dataset:
    path = Path(path)
    try:
        schema = DatasetSchema.model_validate(json.loads(schema_path(path).read_text()))
    except (json.JSONDecodeError, ValidationError) as e:
        raise RecordingFormatError(f"invalid dataset schema: {e}", path=str(schema_path(path))) from None

    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[1:-1] != schema.feature_ids:
            raise SchemaMismatchError(f"{path.name}: header does not match the schema feature ids")
        subject_ids, rows, labels = [], [], []
        for row_number, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise RecordingFormatError(f"expected {len(header)} fields, found {len(row)}",
                                           path=str(path), row=row_number)
            subject_ids.append(row[0])
            try:
                rows.append([float(v) for v in row[1:-1]])
            except ValueError:
                raise RecordingFormatError("not a number", path=str(path), row=row_number) from None
            labels.append(row[-1])

    binning = ClassBinning(schema.binning.mu, schema.binning.sigma) if schema.binning else None
    return Dataset(
        features=np.asarray(rows, dtype=float).reshape(len(rows), len(schema.feature_ids)),
        labels=tuple(labels),
        feature_ids=tuple(FeatureId.parse(f) for f in schema.feature_ids),
        subject_ids=tuple(subject_ids),
        binning=binning,
        provenance=schema.provenance,
    )


# ============= BEHAVIOUR FILE =============

BEHAVIOUR_COLUMNS = ["subject_id", "pre_correct", "post_correct", "total_trials"]


def save_behaviour(records: Sequence[BehaviourRecord], path: PathLike) -> None:
    with Path(path).open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=BEHAVIOUR_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow(record.model_dump())


def load_behaviour(path: PathLike) -> list:
    """Behaviour records from ``subject_id,pre_correct,post_correct,total_trials`` CSV."""
    path = Path(path)
    records = []
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or set(BEHAVIOUR_COLUMNS[:3]) - set(reader.fieldnames):
            raise RecordingFormatError(f"behaviour file needs columns {BEHAVIOUR_COLUMNS}",
                                       path=str(path), row=1)
        for row_number, row in enumerate(reader, start=2):
            try:
                record = BehaviourRecord.model_validate({k: v for k, v in row.items() if v not in (None, "")})
            except ValidationError as e:
                raise RecordingFormatError(f"invalid behaviour row: {e.errors()[0]['msg']}",
                                           path=str(path), row=row_number) from None
            if record.pre_correct > record.total_trials or record.post_correct > record.total_trials:
                raise RecordingFormatError("correct count exceeds total_trials",
                                           path=str(path), row=row_number)
            records.append(record)
    return records
