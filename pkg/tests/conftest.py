import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bloomkit.fixtures import latin_cross_cuts, unit_cube  # noqa: E402
from bloomkit.unfolding import faces_from_cuts, refine_to_serpentine  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def cube():
    return unit_cube()


@pytest.fixture(scope="session")
def latin_cross(cube):
    return faces_from_cuts(cube, latin_cross_cuts(cube))


@pytest.fixture(scope="session")
def refined_cross(latin_cross):
    return refine_to_serpentine(latin_cross)
