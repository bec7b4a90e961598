import pytest

from rotcollapse import townes
from rotcollapse.minimizer import GroundStateSolver


@pytest.fixture(scope="session")
def profile():
    return townes.solve_townes()


@pytest.fixture(scope="session")
def constants(profile):
    return townes.compute_constants(profile)


@pytest.fixture(scope="session")
def solver(profile, constants):
    return GroundStateSolver(profile, constants)
