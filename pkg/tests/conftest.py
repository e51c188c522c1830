import numpy as np
import pytest

from app.ensembles import gen_matrix
from schemas import EnsembleSpec


@pytest.fixture
def gaussian():
    """seeded Gaussian encoder factory: gaussian(m, d, seed)"""

    def make(m: int, d: int, seed: int = 0) -> np.ndarray:
        return gen_matrix(EnsembleSpec(m=m, d=d, seed=seed))

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)