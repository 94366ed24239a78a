"""
Recording I/O
Plain CSV (header of channel labels, one sample per row) plus a JSON sidecar
``<name>.meta.json`` carrying sample rate, labels, subject and session.
"""

import csv
import json
import math
from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger
from pydantic import ValidationError

from app.exceptions import RecordingFormatError
from .models import Recording, RecordingSidecar

PathLike = Union[str, Path]


def sidecar_path(path: PathLike) -> Path:
    """Sidecar location for a CSV data file."""
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


def _read_sidecar(path: Path) -> RecordingSidecar:
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise RecordingFormatError("missing sidecar file", path=str(meta_path))
    try:
        return RecordingSidecar.model_validate(json.loads(meta_path.read_text()))
    except json.JSONDecodeError as e:
        raise RecordingFormatError(f"sidecar is not valid JSON: {e.msg}", path=str(meta_path),
                                   row=e.lineno, column=e.colno) from None
    except ValidationError as e:
        raise RecordingFormatError(f"invalid sidecar: {e.errors()[0]['msg']}",
                                   path=str(meta_path)) from None


def load_recording(path: PathLike) -> Recording:
    """Load a recording from its CSV data file and sidecar."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"recording file not found: {path}")

    meta = _read_sidecar(path)

    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise RecordingFormatError("empty file, expected a header row", path=str(path), row=1) from None

        header = [h.strip() for h in header]
        if len(header) != len(meta.channels):
            raise RecordingFormatError(
                f"sidecar lists {len(meta.channels)} channels but the CSV has {len(header)} columns",
                path=str(path), row=1,
            )
        if header != list(meta.channels):
            column = next(i for i, (a, b) in enumerate(zip(header, meta.channels)) if a != b)
            raise RecordingFormatError(
                f"malformed header: column label '{header[column]}' does not match sidecar "
                f"label '{meta.channels[column]}'",
                path=str(path), row=1, column=column + 1,
            )

        rows = []
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise RecordingFormatError(
                    f"expected {len(header)} values, found {len(row)}",
                    path=str(path), row=row_number,
                )
            values = []
            for col_number, text in enumerate(row, start=1):
                try:
                    value = float(text)
                except ValueError:
                    raise RecordingFormatError(f"not a number: '{text}'", path=str(path),
                                               row=row_number, column=col_number) from None
                if not math.isfinite(value):
                    raise RecordingFormatError(f"non-finite sample '{text}'", path=str(path),
                                               row=row_number, column=col_number)
                values.append(value)
            rows.append(values)

    data = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
    logger.debug(f"Loaded {path.name}: {data.shape[0]} samples x {data.shape[1]} channels")
    return Recording(
        sample_rate=meta.sample_rate,
        channels=tuple(meta.channels),
        data=data,
        subject_id=meta.subject_id,
        session=meta.session,
    )


def save_recording(rec: Recording, path: PathLike) -> None:
    """Write a recording as CSV + sidecar; values keep 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(rec.channels)
        for row in rec.data:
            writer.writerow([format(v, ".17g") for v in row])

    meta = RecordingSidecar(
        sample_rate=rec.sample_rate,
        channels=list(rec.channels),
        subject_id=rec.subject_id,
        session=rec.session,
    )
    sidecar_path(path).write_text(meta.model_dump_json(indent=2) + "\n")
    logger.debug(f"Saved {path.name}: {rec.n_samples} samples x {rec.n_channels} channels")
