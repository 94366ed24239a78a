"""
Report rendering
report.json (sorted keys, no timestamps) and its two markdown views:
the accuracy table and the best-hyperparameter table.
"""

import json
from pathlib import Path
from typing import Dict, List, Tuple

from .models import CellResult, RunReport

FAMILY_TITLES = {"svm": "SVM", "dt": "DT", "rf": "RF", "mlp": "MLP"}


def dump_json(document, path: Path) -> None:
    """Byte-stable JSON: sorted keys, fixed indentation, trailing newline."""
    payload = document.model_dump(mode="json") if hasattr(document, "model_dump") else document
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_report(report: RunReport, run_dir: Path) -> None:
    dump_json(report, run_dir / "report.json")
    render_markdown(report, run_dir)


def load_report(run_dir: Path) -> RunReport:
    return RunReport.model_validate_json((Path(run_dir) / "report.json").read_text())


def _axes(cells: List[CellResult]) -> Tuple[List[Tuple[str, str]], List[str]]:
    rows, columns = [], []
    for result in cells:
        row = (result.cell.metric, result.cell.selector)
        if row not in rows:
            rows.append(row)
        if result.cell.family.value not in columns:
            columns.append(result.cell.family.value)
    return rows, columns


def _format_params(params: Dict) -> str:
    return ", ".join(f"{name}={value}" for name, value in sorted(params.items()))


def render_table(report: RunReport) -> str:
    """Mean repeated-CV test accuracy (%) per metric + selector row and model column."""
    rows, columns = _axes(report.cells)
    lookup = {(c.cell.metric, c.cell.selector, c.cell.family.value): c for c in report.cells}
    lines = [
        f"# Classification accuracy (run {report.run_id})",
        "",
        "| Features | " + " | ".join(FAMILY_TITLES.get(c, c) for c in columns) + " |",
        "|---" * (len(columns) + 1) + "|",
    ]
    for metric, selector in rows:
        cells = []
        for family in columns:
            result = lookup.get((metric, selector, family))
            if result is None:
                cells.append("")
            elif result.status == "ok":
                cells.append(f"{result.report.mean_accuracy_percent:.2f}")
            else:
                cells.append("failed")
        lines.append(f"| {metric.upper()} + {selector.upper()} | " + " | ".join(cells) + " |")

    failed = [c for c in report.cells if c.status == "failed"]
    if failed or report.subject_failures:
        lines += ["", "## Failures", ""]
        lines += [f"- {c.cell.metric}/{c.cell.selector}/{c.cell.family.value}: {c.error}" for c in failed]
        lines += [f"- {failure}" for failure in report.subject_failures]
    return "\n".join(lines) + "\n"


def render_hyperparameters(report: RunReport) -> str:
    """Best grid point per cell."""
    lines = [
        f"# Best hyperparameters (run {report.run_id})",
        "",
        "| Features | Model | Hyperparameters | Grid points |",
        "|---|---|---|---|",
    ]
    for result in report.cells:
        if result.status != "ok":
            continue
        cell = result.cell
        lines.append(
            f"| {cell.metric.upper()} + {cell.selector.upper()} | {FAMILY_TITLES.get(cell.family.value)} "
            f"| {_format_params(result.report.best_hyperparameters)} | {result.report.n_grid_points} |"
        )
    return "\n".join(lines) + "\n"


def render_markdown(report: RunReport, run_dir: Path) -> None:
    run_dir = Path(run_dir)
    (run_dir / "table.md").write_text(render_table(report))
    (run_dir / "hyperparameters.md").write_text(render_hyperparameters(report))
