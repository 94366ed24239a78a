"""
Synthetic cohort
Three classes of subjects whose pre -> post change adds a class-specific
directed coupling to a shared VAR(1) template, with behaviour counts whose
accuracy change falls inside the class bin.
"""

from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
from loguru import logger

from app.exceptions import InvalidParameterError, UnstableModelError
from app.features import BehaviourRecord, ClassBinning, ClassLabel, save_behaviour
from app.seeding import derive_seed, make_rng
from app.signal_io import (
    Session,
    VarGroundTruth,
    check_var_stability,
    default_labels,
    generate_var,
    save_recording,
)
from .models import CohortManifest, CohortSpec, SubjectTruth

MAX_TEMPLATE_ATTEMPTS = 100
MAX_TEMPLATE_RADIUS = 0.95
PRE_CORRECT_RANGE = (10, 26)

# Stream keys for derive_seed.
TEMPLATE_STREAM, RECORDING_STREAM, BEHAVIOUR_STREAM = 1, 2, 3


def class_edges(n_channels: int) -> Dict[str, List[Tuple[int, int]]]:
    """(target, source) couplings added after the intervention, per class."""
    return {label.value: [(label.rank + 3, label.rank)] for label in ClassLabel
            if label.rank + 3 < n_channels}


def delta_count_range(label: ClassLabel, binning: ClassBinning, total_trials: int) -> Tuple[int, int]:
    """Smallest and largest correct-count change whose percentage lands in the bin."""
    edges = binning.edges
    low_edge, high_edge = edges[label.rank], edges[label.rank + 1]
    counts = []
    for d in range(total_trials + 1):
        percent = 100.0 * d / total_trials
        if low_edge <= percent < high_edge or (label is ClassLabel.HIGH and percent == high_edge):
            counts.append(d)
    if not counts:
        raise InvalidParameterError(f"no count change of {total_trials} trials lands in the {label.value} bin")
    return counts[0], counts[-1]


def subject_template(spec: CohortSpec, seed: int, subject_index: int) -> np.ndarray:
    """Pre-intervention B(1): self coupling plus small subject-specific cross terms."""
    n = spec.n_channels
    for attempt in range(MAX_TEMPLATE_ATTEMPTS):
        rng = make_rng(seed, TEMPLATE_STREAM, subject_index, attempt)
        coefficients = rng.normal(0.0, spec.subject_jitter, (n, n))
        np.fill_diagonal(coefficients, spec.self_coupling)
        post = coefficients.copy()
        for target, source in [edge for edges in class_edges(n).values() for edge in edges]:
            post[target, source] += spec.coupling_strength
        radius = max(check_var_stability([coefficients]), check_var_stability([post]))
        if radius < MAX_TEMPLATE_RADIUS:
            return coefficients
    raise UnstableModelError(radius, f"no stable template for subject {subject_index} "
                                     f"(last spectral radius {radius:.3f})")


def synthesize_cohort(spec: CohortSpec, seed: int, recordings_dir: Path) -> CohortManifest:
    """Write pre/post (and optional baseline) recordings, behaviour.csv and manifest.json."""
    recordings_dir = Path(recordings_dir)
    recordings_dir.mkdir(parents=True, exist_ok=True)
    binning = ClassBinning.published()
    templates = class_edges(spec.n_channels)
    n_samples = int(round(spec.duration_seconds * spec.sample_rate))
    baseline_samples = int(round(spec.baseline_seconds * spec.sample_rate))
    channels = default_labels(spec.n_channels)
    noise = np.eye(spec.n_channels)

    subjects: List[SubjectTruth] = []
    behaviour: List[BehaviourRecord] = []
    index = 0
    for label in ClassLabel:
        low_delta, high_delta = delta_count_range(label, binning, spec.total_trials)
        for _ in range(spec.subjects_per_class):
            subject_id = f"sub-{index + 1:03d}"
            pre_coefficients = subject_template(spec, seed, index)
            post_coefficients = pre_coefficients.copy()
            for target, source in templates[label.value]:
                post_coefficients[target, source] += spec.coupling_strength

            for session_index, (session, coefficients) in enumerate(
                ((Session.PRE, pre_coefficients), (Session.POST, post_coefficients))
            ):
                gt = VarGroundTruth((coefficients,), noise, derive_seed(seed, RECORDING_STREAM, index, session_index))
                rec = generate_var(gt, n_samples, sample_rate=spec.sample_rate, channels=channels,
                                   subject_id=subject_id, session=session)
                save_recording(rec, recordings_dir / f"{subject_id}_{session.value}.csv")
                if spec.with_baseline:
                    rest = VarGroundTruth((pre_coefficients,), noise,
                                          derive_seed(seed, RECORDING_STREAM, index, session_index, 1))
                    baseline = generate_var(rest, baseline_samples, sample_rate=spec.sample_rate,
                                            channels=channels, subject_id=subject_id, session=session)
                    save_recording(baseline, recordings_dir / f"{subject_id}_{session.value}_baseline.csv")

            rng = make_rng(seed, BEHAVIOUR_STREAM, index)
            pre_correct = int(rng.integers(PRE_CORRECT_RANGE[0], PRE_CORRECT_RANGE[1] + 1))
            delta = int(rng.integers(low_delta, high_delta + 1))
            post_correct = min(pre_correct + delta, spec.total_trials)
            behaviour.append(BehaviourRecord(subject_id=subject_id, pre_correct=pre_correct,
                                             post_correct=post_correct, total_trials=spec.total_trials))
            subjects.append(SubjectTruth(
                subject_id=subject_id,
                true_class=label.value,
                pre_correct=pre_correct,
                post_correct=post_correct,
                total_trials=spec.total_trials,
                coupling_edges=templates[label.value],
            ))
            index += 1

    save_behaviour(behaviour, recordings_dir / "behaviour.csv")
    manifest = CohortManifest(
        seed=seed,
        n_channels=spec.n_channels,
        sample_rate=spec.sample_rate,
        class_counts={label.value: spec.subjects_per_class for label in ClassLabel},
        class_templates=templates,
        subjects=subjects,
    )
    (recordings_dir / "manifest.json").write_text(manifest.model_dump_json(indent=2) + "\n")
    logger.info(f"Synthesized {len(subjects)} subjects into {recordings_dir}")
    return manifest


def recording_paths(directory: Path) -> List[Path]:
    """Task recordings (baselines excluded) in name order."""
    return sorted(p for p in Path(directory).glob("*.csv")
                  if p.name != "behaviour.csv" and not p.stem.endswith("_baseline"))


def baseline_for(path: Path) -> Path:
    return path.with_name(f"{path.stem}_baseline.csv")
