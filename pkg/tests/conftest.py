import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from canonkit.classify import classify_sequence
from canonkit.lattice import expanding_square_sequence


@pytest.fixture(scope="session")
def square_fixture():
    """The two-move expanding-lattice example at m = 0 with reference bases."""
    fx = expanding_square_sequence(2, mass=0.0)
    bases = classify_sequence(fx.sequence, overrides={1: fx.basis_t1, 2: fx.basis_t2})
    return fx, bases


@pytest.fixture(scope="session")
def square_fixture_massive():
    fx = expanding_square_sequence(2, mass=0.7)
    bases = classify_sequence(fx.sequence, overrides={1: fx.basis_t1, 2: fx.basis_t2})
    return fx, bases


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
