"""Configuration management for the connectivity pipeline"""

import os

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Process settings loaded from environment variables"""

    # Environment
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Runs
    OUTPUT_DIR: str = "out"
    JOBS: int = os.cpu_count() or 1
    DEFAULT_SEED: int = 20240101

    # Spectral estimation
    WELCH_WINDOW_SECONDS: float = 2.0
    WELCH_OVERLAP: float = 0.5
    WAVELET_OMEGA0: float = 6.0
    WAVELET_SMOOTHING_CYCLES: float = 24.0

    # Connectivity
    BAND_LOW: float = 13.0
    BAND_HIGH: float = 29.0
    MVAR_MAX_ORDER: int = 20

    @property
    def band(self) -> tuple[float, float]:
        """Default analysis band as a (low, high) tuple"""
        return (self.BAND_LOW, self.BAND_HIGH)

    @property
    def log_level(self) -> str:
        return "DEBUG" if self.DEBUG else self.LOG_LEVEL.upper()

    class Config:
        env_file = ".env"
        case_sensitive = True


# Global settings instance
settings = Settings()
