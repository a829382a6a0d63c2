import numpy as np
import pytest


@pytest.fixture
def rng():
    """Deterministic RNG for tests; the library itself never uses randomness."""
    return np.random.default_rng(0xC0FFEE)
