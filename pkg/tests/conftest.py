import math

import pytest
from hypothesis import HealthCheck, settings

from vrpdelegate.core import CVRP, CVRPTW, VRPMPD, City, Depot, Instance
from vrpdelegate.generate import GenSpec
from vrpdelegate.subsolver import BuiltinSubsolver

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def make_instance(points, demands=None, capacity=50, variant=CVRP, depot=(0.0, 0.0), **kw):
    demands = demands or [1] * len(points)
    cities = tuple(City(float(x), float(y), int(q)) for (x, y), q in zip(points, demands))
    return Instance(variant, Depot(*depot), capacity, cities, **kw)


@pytest.fixture(scope="session")
def solver():
    return BuiltinSubsolver()


@pytest.fixture(scope="session")
def small_instances():
    """One small instance per variant."""
    return {
        CVRP: GenSpec(CVRP, 60, "uniform", 0, 3).build(),
        CVRPTW: GenSpec(CVRPTW, 60, "uniform", 0, 3).build(),
        VRPMPD: GenSpec(VRPMPD, 60, "uniform", 0, 3).build(),
    }


def tw_instance(points, windows, service=0.0, depot_window=(0.0, math.inf)):
    cities = tuple(City(x, y, 1, 0, e, l, service) for (x, y), (e, l) in zip(points, windows))
    return Instance(CVRPTW, Depot(0.0, 0.0, *depot_window), 50, cities)
