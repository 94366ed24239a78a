"""
Feature data model
Class labels and their binning, flattened feature vectors and the labelled
subject-by-feature dataset handed to the classifiers.
"""

import enum
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.exceptions import DegenerateDataError, InvalidParameterError, SchemaMismatchError

PUBLISHED_MU = 20.76
PUBLISHED_SIGMA = 14.78


class ClassLabel(str, enum.Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"

    @property
    def rank(self) -> int:
        return list(ClassLabel).index(self)


@dataclass(frozen=True)
class ClassBinning:
    """
    Three bins over the pre/post accuracy change:
    low [mu, mu+sigma), medium [mu+sigma, mu+2sigma), high [mu+2sigma, mu+3sigma].
    """

    mu: float
    sigma: float
    labels: Tuple[ClassLabel, ...] = (ClassLabel.LOW, ClassLabel.MEDIUM, ClassLabel.HIGH)

    def __post_init__(self):
        if not (np.isfinite(self.mu) and np.isfinite(self.sigma)):
            raise InvalidParameterError("binning parameters must be finite")
        if self.sigma <= 0:
            raise InvalidParameterError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "labels", tuple(ClassLabel(label) for label in self.labels))

    @property
    def edges(self) -> Tuple[float, float, float, float]:
        # 10 decimals: the published edges read back as 35.54, 50.32, 65.1
        return tuple(round(self.mu + k * self.sigma, 10) for k in range(4))

    @classmethod
    def published(cls) -> "ClassBinning":
        return cls(mu=PUBLISHED_MU, sigma=PUBLISHED_SIGMA)

    @classmethod
    def from_deltas(cls, deltas: Sequence[float]) -> "ClassBinning":
        """Mean and sample standard deviation of observed accuracy changes."""
        deltas = np.asarray(deltas, dtype=float)
        if deltas.size < 2:
            raise DegenerateDataError("at least two deltas are needed to estimate a binning")
        return cls(mu=float(deltas.mean()), sigma=float(deltas.std(ddof=1)))


class FeatureId(NamedTuple):
    metric: str
    source: str
    target: str

    def __str__(self) -> str:
        return f"{self.metric}:{self.source}->{self.target}"

    @classmethod
    def parse(cls, text: str) -> "FeatureId":
        try:
            metric, pair = text.split(":", 1)
            source, target = pair.split("->", 1)
        except ValueError:
            raise SchemaMismatchError(f"malformed feature id '{text}'") from None
        return cls(metric, source, target)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    feature_ids: Tuple[FeatureId, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_ids", tuple(FeatureId(*f) for f in self.feature_ids))
        if values.size != len(self.feature_ids):
            raise SchemaMismatchError(
                f"{values.size} values but {len(self.feature_ids)} feature ids"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("feature values must be finite")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Dataset:
    """Rows are subjects; ``features`` is rows x features."""

    features: np.ndarray
    labels: Tuple[str, ...]
    feature_ids: Tuple[FeatureId, ...]
    subject_ids: Tuple[str, ...] = ()
    binning: Optional[ClassBinning] = None
    provenance: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        features = np.array(self.features, dtype=float, copy=True)
        if features.ndim != 2:
            raise InvalidParameterError("dataset features must be rows x features")
        features.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", tuple(str(getattr(label, "value", label)) for label in self.labels))
        object.__setattr__(self, "feature_ids", tuple(FeatureId(*f) for f in self.feature_ids))
        subject_ids = tuple(self.subject_ids) or tuple(f"row{i:03d}" for i in range(features.shape[0]))
        object.__setattr__(self, "subject_ids", subject_ids)

        if features.shape[1] != len(self.feature_ids):
            raise SchemaMismatchError(
                f"{features.shape[1]} feature columns but {len(self.feature_ids)} feature ids"
            )
        if len(self.labels) != features.shape[0] or len(subject_ids) != features.shape[0]:
            raise SchemaMismatchError("one label and one subject id are required per row")
        if not np.all(np.isfinite(features)):
            raise InvalidParameterError("dataset features must be finite")
        if self.binning is not None:
            allowed = {label.value for label in self.binning.labels}
            unknown = sorted(set(self.labels) - allowed)
            if unknown:
                raise InvalidParameterError(f"labels {unknown} are not binning labels")

    @classmethod
    def from_vectors(cls, rows: Sequence[Tuple[FeatureVector, str]],
                     subject_ids: Sequence[str] = (),
                     binning: Optional[ClassBinning] = None) -> "Dataset":
        if not rows:
            raise DegenerateDataError("a dataset needs at least one row")
        schema = rows[0][0].feature_ids
        for index, (vector, _) in enumerate(rows):
            if vector.feature_ids != schema:
                raise SchemaMismatchError(f"row {index} does not share the dataset schema")
        return cls(
            features=np.vstack([vector.values for vector, _ in rows]),
            labels=tuple(label for _, label in rows),
            feature_ids=schema,
            subject_ids=tuple(subject_ids),
            binning=binning,
        )

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.labels)

    @property
    def classes(self) -> List[str]:
        return sorted(set(self.labels))

    def select_features(self, indices: Sequence[int]) -> "Dataset":
        indices = list(indices)
        return Dataset(
            features=self.features[:, indices],
            labels=self.labels,
            feature_ids=tuple(self.feature_ids[i] for i in indices),
            subject_ids=self.subject_ids,
            binning=self.binning,
            provenance=dict(self.provenance),
        )

    def select_rows(self, indices: Sequence[int]) -> "Dataset":
        indices = list(indices)
        return Dataset(
            features=self.features[indices],
            labels=tuple(self.labels[i] for i in indices),
            feature_ids=self.feature_ids,
            subject_ids=tuple(self.subject_ids[i] for i in indices),
            binning=self.binning,
            provenance=dict(self.provenance),
        )

    def with_labels(self, labels: Sequence[str]) -> "Dataset":
        return Dataset(
            features=self.features,
            labels=tuple(labels),
            feature_ids=self.feature_ids,
            subject_ids=self.subject_ids,
            binning=self.binning,
            provenance=dict(self.provenance),
        )


# ============= BEHAVIOUR AND ON-DISK SCHEMA =============

class BehaviourRecord(BaseModel):
    """Correct responses of one subject on the task before and after the intervention."""

    subject_id: str
    pre_correct: int = Field(ge=0)
    post_correct: int = Field(ge=0)
    total_trials: int = Field(default=72, gt=0)


class BinningSchema(BaseModel):
    mu: float
    sigma: float


class DatasetSchema(BaseModel):
    """``<name>.schema.json`` next to a dataset CSV."""

    feature_ids: List[str]
    binning: Optional[BinningSchema] = None
    provenance: Dict[str, str] = {}
