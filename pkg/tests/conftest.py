from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from drmpc.linsys import double_integrator

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def di():
    """Double integrator with |u| <= 1, |x_i| <= 10, |d_i| <= 0.05."""
    return double_integrator()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
