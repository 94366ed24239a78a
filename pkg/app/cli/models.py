"""
Run configuration and on-disk result documents
A single JSON document declares a run; CLI flags override it.
"""

import hashlib
import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from app.config import settings
from app.connectivity import Metric
from app.features.models import PUBLISHED_MU, PUBLISHED_SIGMA
from app.ml import CellId, CvReport, ModelFamily, Selector
from app.preprocess import BaselineMode


# ============= RUN CONFIGURATION =============

class CohortSpec(BaseModel):
    """Synthetic cohort: one coupling template change per class."""

    subjects_per_class: int = Field(default=17, ge=2)
    n_channels: int = Field(default=8, ge=6)
    duration_seconds: float = Field(default=60.0, gt=0)
    sample_rate: float = Field(default=256.0, gt=0)
    coupling_strength: float = Field(default=0.4, gt=0, lt=1)
    self_coupling: float = Field(default=0.5, ge=0, lt=1)
    subject_jitter: float = Field(default=0.02, ge=0)
    total_trials: int = Field(default=72, gt=0)
    with_baseline: bool = False
    baseline_seconds: float = Field(default=60.0, gt=0)


class PreprocessSpec(BaseModel):
    enabled: bool = True
    bandpass: Optional[Tuple[float, float]] = (0.1, 45.0)
    bandpass_order: int = Field(default=10, ge=1)
    notch: Optional[float] = 50.0
    reference_labels: List[str] = []
    baseline: bool = False
    baseline_mode: BaselineMode = BaselineMode.MEAN


class ConnectivitySpec(BaseModel):
    metrics: List[Metric] = Field(default=[Metric.MSC, Metric.WC, Metric.PDC], min_length=1)
    band: Tuple[float, float] = (settings.BAND_LOW, settings.BAND_HIGH)
    welch_window_seconds: float = Field(default=settings.WELCH_WINDOW_SECONDS, gt=0)
    welch_overlap: float = Field(default=settings.WELCH_OVERLAP, ge=0, lt=1)
    omega0: float = settings.WAVELET_OMEGA0
    smoothing_cycles: float = Field(default=settings.WAVELET_SMOOTHING_CYCLES, gt=0)
    mvar_order: Optional[int] = Field(default=None, ge=1)
    max_order: int = Field(default=settings.MVAR_MAX_ORDER, ge=1)
    order_criterion: Literal["aic", "hq", "bic"] = "aic"

    @field_validator("band")
    @classmethod
    def _band_ordered(cls, band):
        if not 0 <= band[0] < band[1]:
            raise ValueError("band must satisfy 0 <= low < high")
        return band


class BinningSpec(BaseModel):
    mode: Literal["fixed", "recompute"] = "fixed"
    mu: float = PUBLISHED_MU
    sigma: float = Field(default=PUBLISHED_SIGMA, gt=0)


class ClassifySpec(BaseModel):
    selectors: List[Selector] = Field(default=[Selector.FFS, Selector.RFE], min_length=1)
    families: List[ModelFamily] = Field(
        default=[ModelFamily.SVM, ModelFamily.DT, ModelFamily.RF, ModelFamily.MLP], min_length=1
    )
    grid: Literal["coarse", "full"] = "coarse"
    top_k: int = Field(default=100, ge=1)
    folds: int = Field(default=10, ge=2)
    repeats: int = Field(default=3, ge=1)
    binning: BinningSpec = BinningSpec()
    delta_mode: Literal["absolute", "signed"] = "absolute"
    ffs_scorer: Optional[ModelFamily] = None


class RunConfig(BaseModel):
    """Everything a run needs; the run id is a hash of this document."""

    synthetic: Optional[CohortSpec] = CohortSpec()
    recordings_dir: Optional[str] = None
    behaviour_file: Optional[str] = None
    preprocessing: PreprocessSpec = PreprocessSpec()
    connectivity: ConnectivitySpec = ConnectivitySpec()
    classification: ClassifySpec = ClassifySpec()
    seed: int = Field(default=settings.DEFAULT_SEED, ge=0, lt=2 ** 64)
    output_dir: str = settings.OUTPUT_DIR
    jobs: int = Field(default=settings.JOBS, ge=1)

    @model_validator(mode="after")
    def _one_input(self):
        if self.recordings_dir is None and self.synthetic is None:
            raise ValueError("either 'synthetic' or 'recordings_dir' must be given")
        if self.recordings_dir is not None and self.behaviour_file is None:
            raise ValueError("'behaviour_file' is required with 'recordings_dir'")
        return self

    @property
    def run_id(self) -> str:
        """First 12 hex digits of the SHA-256 of the result-relevant configuration."""
        document = self.model_dump(mode="json", exclude={"output_dir", "jobs"})
        canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]

    @property
    def run_dir(self) -> Path:
        return Path(self.output_dir) / self.run_id


# ============= RESULT DOCUMENTS =============

class SubjectTruth(BaseModel):
    subject_id: str
    true_class: str
    pre_correct: int
    post_correct: int
    total_trials: int
    coupling_edges: List[Tuple[int, int]]


class CohortManifest(BaseModel):
    seed: int
    n_channels: int
    sample_rate: float
    class_counts: Dict[str, int]
    class_templates: Dict[str, List[Tuple[int, int]]]
    subjects: List[SubjectTruth]


class CellResult(BaseModel):
    cell: CellId
    status: Literal["ok", "failed"]
    report: Optional[CvReport] = None
    error: Optional[str] = None


class RunReport(BaseModel):
    run_id: str
    seed: int
    n_subjects: int
    classes: List[str]
    cells: List[CellResult]
    subject_failures: List[str] = []
