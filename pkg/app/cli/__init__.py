"""Command-line module"""
from .commands import (
    cmd_classify,
    cmd_connectivity,
    cmd_preprocess,
    cmd_report,
    cmd_synth,
    cmd_validate,
    load_run_config,
)
from .models import CohortSpec, RunConfig, RunReport
from .router import build_parser, dispatch

__all__ = [
    "cmd_classify",
    "cmd_connectivity",
    "cmd_preprocess",
    "cmd_report",
    "cmd_synth",
    "cmd_validate",
    "load_run_config",
    "CohortSpec",
    "RunConfig",
    "RunReport",
    "build_parser",
    "dispatch",
]
