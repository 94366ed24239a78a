"""
CLI commands
One function per subcommand. Each takes a validated RunConfig, works inside
``<output_dir>/<run-id>/`` and returns what it produced; per-subject and
per-cell failures are collected instead of aborting the run.
"""

import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from joblib import Parallel, delayed
from loguru import logger
from pydantic import ValidationError

from app.connectivity import ConnectivityMatrix, Metric, compute_connectivity, load_matrix, save_matrix
from app.exceptions import ConfigValidationError, PipelineError
from app.features import (
    ClassBinning,
    accuracy_deltas,
    build_dataset,
    label_subjects,
    load_behaviour,
    save_dataset,
)
from app.ml import CellId, CvSpec, HyperparameterGrid, evaluate_pipeline, grid_cardinality
from app.preprocess import preprocess_recording
from app.signal_io import Session, load_recording, save_recording, sidecar_path
from .cohort import baseline_for, recording_paths, synthesize_cohort
from .models import CellResult, CohortManifest, RunConfig, RunReport
from .report import load_report, render_markdown, write_report

LARGE_GRID_WARNING = 1_000_000


# ============= CONFIGURATION =============

def _issues(error: ValidationError) -> List[Tuple[str, str]]:
    return [(".".join(str(part) for part in e["loc"]) or "<root>", e["msg"]) for e in error.errors()]


def load_run_config(path: Optional[str] = None, seed: Optional[int] = None,
                    out: Optional[str] = None, jobs: Optional[int] = None) -> RunConfig:
    """Config file overlaid with CLI flags (flag > file > default)."""
    document: Dict = {}
    if path is not None:
        try:
            document = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigValidationError([("--config", f"file not found: {path}")]) from None
        except json.JSONDecodeError as e:
            raise ConfigValidationError([("--config", f"invalid JSON at line {e.lineno}: {e.msg}")]) from None
        if not isinstance(document, dict):
            raise ConfigValidationError([("<root>", "the configuration must be a JSON object")])
    for name, value in (("seed", seed), ("output_dir", out), ("jobs", jobs)):
        if value is not None:
            document[name] = value
    try:
        return RunConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigValidationError(_issues(e)) from None


def check_paths(config: RunConfig) -> List[Tuple[str, str]]:
    issues = []
    if config.recordings_dir is not None and not Path(config.recordings_dir).is_dir():
        issues.append(("recordings_dir", f"directory not found: {config.recordings_dir}"))
    if config.behaviour_file is not None and not Path(config.behaviour_file).is_file():
        issues.append(("behaviour_file", f"file not found: {config.behaviour_file}"))
    return issues


def _require_paths(config: RunConfig) -> None:
    issues = check_paths(config)
    if issues:
        raise ConfigValidationError(issues)


# ============= RUN LAYOUT =============

def recordings_dir(config: RunConfig) -> Path:
    return Path(config.recordings_dir) if config.recordings_dir else config.run_dir / "recordings"


def behaviour_path(config: RunConfig) -> Path:
    return Path(config.behaviour_file) if config.behaviour_file else recordings_dir(config) / "behaviour.csv"


def connectivity_input_dir(config: RunConfig) -> Path:
    return config.run_dir / "preprocessed" if config.preprocessing.enabled else recordings_dir(config)


def _up_to_date(output: Path, source: Path) -> bool:
    return (output.exists() and sidecar_path(output).exists()
            and output.stat().st_mtime >= source.stat().st_mtime)


# ============= SYNTH =============

def cmd_synth(config: RunConfig) -> CohortManifest:
    if config.synthetic is None:
        raise ConfigValidationError([("synthetic", "a synthetic cohort spec is required for 'synth'")])
    return synthesize_cohort(config.synthetic, config.seed, config.run_dir / "recordings")


# ============= PREPROCESS =============

def _preprocess_one(source: Path, target: Path, config: RunConfig) -> Optional[str]:
    spec = config.preprocessing
    try:
        rec = load_recording(source)
        baseline = load_recording(baseline_for(source)) if spec.baseline else None
        out = preprocess_recording(
            rec,
            bandpass=spec.bandpass,
            bandpass_order=spec.bandpass_order,
            notch=spec.notch,
            reference_labels=spec.reference_labels,
            baseline=baseline,
            baseline_mode=spec.baseline_mode,
        )
        save_recording(out, target)
    except (PipelineError, OSError) as e:
        logger.error(f"Preprocessing {source.name} failed: {e}")
        return f"{source.stem}: preprocessing failed: {e}"
    return None


def cmd_preprocess(config: RunConfig) -> List[str]:
    """Preprocess every task recording; returns the failures."""
    _require_paths(config)
    if not config.preprocessing.enabled:
        logger.info("Preprocessing disabled in the run configuration")
        return []
    source_dir, target_dir = recordings_dir(config), config.run_dir / "preprocessed"
    target_dir.mkdir(parents=True, exist_ok=True)

    jobs = []
    for source in recording_paths(source_dir):
        target = target_dir / source.name
        if _up_to_date(target, source):
            logger.debug(f"{target.name} is up to date")
            continue
        jobs.append((source, target))
    logger.info(f"Preprocessing {len(jobs)} recording(s) into {target_dir}")
    results = Parallel(n_jobs=config.jobs)(delayed(_preprocess_one)(s, t, config) for s, t in jobs)
    return [r for r in results if r]


# ============= CONNECTIVITY =============

def matrix_path(matrices_dir: Path, recording: Path, metric: Metric) -> Path:
    return matrices_dir / f"{recording.stem}_{metric.value}.csv"


def _connectivity_one(source: Path, metrics: List[Metric], matrices_dir: Path,
                      config: RunConfig) -> List[str]:
    spec = config.connectivity
    failures = []
    try:
        rec = load_recording(source)
    except (PipelineError, OSError) as e:
        logger.error(f"Loading {source.name} failed: {e}")
        return [f"{source.stem}: {e}"]
    for metric in metrics:
        try:
            matrix = compute_connectivity(
                rec,
                metric,
                spec.band,
                window_len=int(round(spec.welch_window_seconds * rec.sample_rate)),
                overlap=spec.welch_overlap,
                omega0=spec.omega0,
                smoothing_cycles=spec.smoothing_cycles,
                mvar_order=spec.mvar_order,
                max_order=spec.max_order,
                order_criterion=spec.order_criterion,
            )
            save_matrix(matrix, matrix_path(matrices_dir, source, metric))
        except (PipelineError, OSError) as e:
            logger.error(f"{metric.value} for {source.name} failed: {e}")
            failures.append(f"{source.stem}: {metric.value} failed: {e}")
    return failures


def cmd_connectivity(config: RunConfig) -> List[str]:
    """One matrix file per (recording, metric); up-to-date files are skipped."""
    _require_paths(config)
    source_dir = connectivity_input_dir(config)
    matrices_dir = config.run_dir / "matrices"
    matrices_dir.mkdir(parents=True, exist_ok=True)

    sources = recording_paths(source_dir)
    if not sources:
        raise PipelineError(f"no recordings found in {source_dir}")
    jobs = []
    for source in sources:
        pending = [m for m in config.connectivity.metrics
                   if not _up_to_date(matrix_path(matrices_dir, source, m), source)]
        if pending:
            jobs.append((source, pending))
    logger.info(f"Computing {sum(len(p) for _, p in jobs)} matrix file(s) into {matrices_dir}")
    results = Parallel(n_jobs=config.jobs)(
        delayed(_connectivity_one)(source, pending, matrices_dir, config) for source, pending in jobs
    )
    return [failure for failures in results for failure in failures]


# ============= CLASSIFY =============

def _binning(config: RunConfig, records) -> ClassBinning:
    spec = config.classification.binning
    if spec.mode == "recompute":
        binning = ClassBinning.from_deltas(accuracy_deltas(records))
        logger.info(f"Recomputed binning: mu={binning.mu:.2f}, sigma={binning.sigma:.2f}")
        return binning
    return ClassBinning(spec.mu, spec.sigma)


def _load_pairs(matrices_dir: Path, metric: Metric, labels: Dict[str, str]
                ) -> Tuple[Dict[str, Tuple[ConnectivityMatrix, ConnectivityMatrix]], List[str]]:
    sessions: Dict[str, Dict[Session, ConnectivityMatrix]] = {}
    for path in sorted(matrices_dir.glob(f"*_{metric.value}.csv")):
        matrix = load_matrix(path)
        sessions.setdefault(matrix.subject_id, {})[matrix.session] = matrix

    pairs, failures = {}, []
    for subject_id in sorted(set(sessions) | set(labels)):
        found = sessions.get(subject_id, {})
        missing = [s.value for s in Session if s not in found]
        if missing:
            failures.append(f"{subject_id}: missing {'/'.join(missing)} {metric.value} matrix")
        elif subject_id not in labels:
            failures.append(f"{subject_id}: no behaviour record")
        else:
            pairs[subject_id] = (found[Session.PRE], found[Session.POST])
    return pairs, failures


def cmd_classify(config: RunConfig) -> RunReport:
    """Evaluate every enabled (metric, selector, family) cell and write the report."""
    _require_paths(config)
    spec = config.classification
    records = load_behaviour(behaviour_path(config))
    binning = _binning(config, records)
    labels = label_subjects(records, binning)
    matrices_dir = config.run_dir / "matrices"
    datasets_dir = config.run_dir / "datasets"
    datasets_dir.mkdir(parents=True, exist_ok=True)

    cells: List[CellResult] = []
    subject_failures: List[str] = []
    for metric in config.connectivity.metrics:
        pairs, failures = _load_pairs(matrices_dir, metric, labels)
        subject_failures += failures
        if pairs:
            save_dataset(build_dataset(pairs, labels, spec.delta_mode, binning),
                         datasets_dir / f"{metric.value}.csv")
        for selector in spec.selectors:
            for family in spec.families:
                cell = CellId(metric=metric.value, selector=selector.value, family=family)
                grid = (HyperparameterGrid.full(family) if spec.grid == "full"
                        else HyperparameterGrid.coarse(family))
                try:
                    report = evaluate_pipeline(
                        pairs, labels, metric.value, selector, family,
                        grid=grid,
                        seed=config.seed,
                        k=spec.top_k,
                        cv=CvSpec(folds=spec.folds, repeats=spec.repeats),
                        delta_mode=spec.delta_mode,
                        ffs_scorer=spec.ffs_scorer,
                        n_jobs=config.jobs,
                    )
                    cells.append(CellResult(cell=cell, status="ok", report=report))
                    logger.info(f"{metric.value}/{selector.value}/{family.value}: "
                                f"{report.mean_accuracy_percent:.2f}%")
                except (PipelineError, ValueError) as e:
                    logger.error(f"{metric.value}/{selector.value}/{family.value} failed: {e}")
                    cells.append(CellResult(cell=cell, status="failed", error=str(e)))

    report = RunReport(
        run_id=config.run_id,
        seed=config.seed,
        n_subjects=len(labels),
        classes=sorted(set(labels.values())),
        cells=cells,
        subject_failures=subject_failures,
    )
    write_report(report, config.run_dir)
    return report


# ============= VALIDATE / REPORT =============

def _subject_count(config: RunConfig) -> int:
    if config.recordings_dir is None:
        return 3 * config.synthetic.subjects_per_class
    return len({p.stem.rsplit("_", 1)[0] for p in recording_paths(Path(config.recordings_dir))})


def cmd_validate(config: RunConfig) -> Dict:
    """Diagnostics for a configuration; raises ConfigValidationError when it is not runnable."""
    _require_paths(config)
    spec = config.classification
    warnings = []
    cardinalities = {}
    for family in spec.families:
        points = grid_cardinality(family.value, spec.grid)
        cardinalities[family.value] = points
        if points > LARGE_GRID_WARNING:
            message = f"{spec.grid} {family.value} grid has {points} points"
            warnings.append(message)
            logger.warning(message)

    n_subjects = _subject_count(config)
    folds = spec.folds * spec.repeats
    work_units = {
        "connectivity": n_subjects * len(Session) * len(config.connectivity.metrics),
        "selection_fits": len(config.connectivity.metrics) * len(spec.selectors) * len(spec.families) * folds,
        "model_fits": len(config.connectivity.metrics) * len(spec.selectors) * folds
        * math.fsum(cardinalities.values()),
    }
    return {
        "run_id": config.run_id,
        "subjects": n_subjects,
        "cells": len(config.connectivity.metrics) * len(spec.selectors) * len(spec.families),
        "grid_points": cardinalities,
        "work_units": {name: int(value) for name, value in work_units.items()},
        "warnings": warnings,
    }


def cmd_report(config: RunConfig) -> RunReport:
    """Re-render the markdown tables from an existing report.json."""
    path = config.run_dir / "report.json"
    if not path.exists():
        raise PipelineError(f"no report at {path}; run 'classify' first")
    report = load_report(config.run_dir)
    render_markdown(report, config.run_dir)
    return report
