"""
Shared fixtures: the two built-in scenarios and a few small problems
whose minimum time is known by hand
"""
import numpy as np
import pytest

from sweepctl.modules.a_geometry import Box, HalfSpace, MovingInterval, TargetSet
from sweepctl.modules.b_dynamics import BallField
from sweepctl.modules.e_scenarios import example1, example2


@pytest.fixture(scope="session")
def ex1():
    return example1()


@pytest.fixture(scope="session")
def ex2():
    return example2()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def unit_interval():
    """Static [0, 1]"""
    return MovingInterval(0.0, 0.0, 1.0, 0.0)


@pytest.fixture
def unit_speed():
    """x' in [-1, 1]"""
    return BallField(1.0, dim=1, bound=1.0)


@pytest.fixture
def right_end():
    """S = {x >= 1}"""
    return TargetSet(HalfSpace([-1.0], -1.0))


@pytest.fixture
def unit_box():
    return Box([0.0, 0.0], [1.0, 2.0])
