import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from omplab.ensembles import alltop_gabor, gaussian_matrix
from omplab.model import SensingMatrix


@pytest.fixture(scope="session")
def gabor31() -> SensingMatrix:
    return alltop_gabor(31)


@pytest.fixture(scope="session")
def gabor5() -> SensingMatrix:
    return alltop_gabor(5)


@pytest.fixture(scope="session")
def gaussian_64_128() -> SensingMatrix:
    return gaussian_matrix(64, 128, 1)


@pytest.fixture
def identity2() -> SensingMatrix:
    return SensingMatrix(np.eye(2, dtype=np.complex128), label="identity2")


@pytest.fixture
def identity4() -> SensingMatrix:
    return SensingMatrix(np.eye(4, dtype=np.complex128), label="identity4")
