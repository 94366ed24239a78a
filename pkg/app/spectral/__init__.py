"""Spectral estimation module"""
from .models import CrossSpectralDensity, WaveletTransform
from .service import morlet_cwt, morlet_scale, welch_csd

__all__ = ["CrossSpectralDensity", "WaveletTransform", "morlet_cwt", "morlet_scale", "welch_csd"]
