"""Signal I/O module"""
from .models import Recording, RecordingSidecar, Session, VarGroundTruth
from .service import load_recording, save_recording, sidecar_path
from .synthetic import (
    check_var_stability,
    companion_matrix,
    default_labels,
    generate_coupled_sinusoids,
    generate_var,
    simulate_var,
)

__all__ = [
    "Recording",
    "RecordingSidecar",
    "Session",
    "VarGroundTruth",
    "load_recording",
    "save_recording",
    "sidecar_path",
    "check_var_stability",
    "companion_matrix",
    "default_labels",
    "generate_coupled_sinusoids",
    "generate_var",
    "simulate_var",
]
