import math

import numpy as np
import pytest

from qiopa.polarization import Qubit


def random_qubit(rng: np.random.Generator) -> Qubit:
    u = rng.uniform(0.0, 1.0)
    return Qubit(math.sqrt(u), math.sqrt(1.0 - u),
                 rng.uniform(-math.pi, math.pi))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
