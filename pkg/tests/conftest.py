import math

import pytest

from jamswarm.channel import GridSpec, Jammer, Position, RadiationPattern
from jamswarm.optimizer import Environment, GaConfig


def make_env(n_uav=4, jammer=(25.0, 50.0), power=100.0, pattern=None, grid=None):
    return Environment(
        grid=grid or GridSpec(),
        jammer=Jammer(Position(*jammer), power_dbm=power),
        pattern=pattern or RadiationPattern.default(),
        n_uav=n_uav,
    )


@pytest.fixture
def env():
    return make_env()


@pytest.fixture
def omni_env():
    return make_env(pattern=RadiationPattern.omnidirectional())


@pytest.fixture
def pair_env():
    """Two UAVs 20 m apart on the x axis with the jammer switched off."""
    return make_env(n_uav=2, power=-math.inf)


PAIR_POSITIONS = [[10.0, 20.0], [30.0, 20.0]]

SMALL_GA = GaConfig(
    population_size=8, max_generations=4, inner_population_size=6, inner_max_generations=3
)
