import numpy as np
import pytest

from ternstab import AlgebraInstance, SampleGrid

ALGEBRAS = ["complex", "pointwise:4", "matrix:3"]


@pytest.fixture(params=ALGEBRAS, scope="session")
def algebra(request):
    return AlgebraInstance.parse(request.param)


@pytest.fixture
def complex_line():
    return AlgebraInstance.parse("complex")


@pytest.fixture
def small_grid():
    return SampleGrid(seed=2024, count=16)


def el(*coords):
    return np.array(coords, dtype=complex)
