import numpy as np
import pytest

from unibranch import mcbvp


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def mesh200():
    return mcbvp.MeshProblem()


@pytest.fixture(scope="session")
def base200(mesh200):
    return mcbvp.base_solution(mesh200)
