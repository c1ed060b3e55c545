import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def pytest_configure(config):
    # keep BLAS from oversubscribing the small CI machines
    import os

    os.environ.setdefault("OMP_NUM_THREADS", "1")
