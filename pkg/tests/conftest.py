import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from torusflow.fourier_core import PeriodicGrid

settings.register_profile(
    "torusflow",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("torusflow")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid32():
    return PeriodicGrid(2, 32)


@pytest.fixture
def grid64():
    return PeriodicGrid(2, 64)
