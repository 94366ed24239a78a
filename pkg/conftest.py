"""Shared pytest fixtures for the connectivity pipeline tests"""

import numpy as np
import pytest
from loguru import logger

from app.signal_io import Recording, Session, VarGroundTruth


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


@pytest.fixture
def make_recording(rng):
    """Factory for random recordings: make_recording(n_samples, n_channels, ...)."""

    def _make(n_samples=512, n_channels=4, sample_rate=256.0, channels=None,
              subject_id="sub-001", session=Session.PRE):
        labels = channels or tuple(f"c{i + 1}" for i in range(n_channels))
        return Recording(
            sample_rate=sample_rate,
            channels=labels,
            data=rng.standard_normal((n_samples, len(labels))),
            subject_id=subject_id,
            session=session,
        )

    return _make


@pytest.fixture
def unidirectional_var():
    """Channel 1 drives channel 2 at lag 1; nothing flows back."""
    return VarGroundTruth(
        coefficients=(np.array([[0.5, 0.0], [0.4, 0.5]]),),
        noise_covariance=np.eye(2),
        seed=7,
    )


@pytest.fixture
def captured_logs():
    """Collect loguru messages emitted during a test."""
    messages = []
    handler_id = logger.add(lambda message: messages.append(message.record), level="DEBUG")
    yield messages
    logger.remove(handler_id)
