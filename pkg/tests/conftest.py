import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lcupea import build_h2, build_lcu, choose_kappa, exact_spectrum


@pytest.fixture(scope="session")
def h2():
    return build_h2()


@pytest.fixture(scope="session")
def h2_spectrum(h2):
    return exact_spectrum(h2)


@pytest.fixture(scope="session")
def h2_kappa(h2):
    return choose_kappa(h2)


@pytest.fixture(scope="session")
def h2_lcu(h2, h2_kappa):
    return build_lcu(h2, h2_kappa)


@pytest.fixture(scope="session")
def h2_ground(h2_spectrum):
    evals, evecs = h2_spectrum
    return np.asarray(evecs[:, 0], dtype=complex)
