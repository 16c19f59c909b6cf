"""Built-in subsolver: seeded sweep construction followed by local search."""

from __future__ import annotations

import math
import os
import time

import numpy as np

from ..core import CVRPTW, VRPMPD, Instance, Solution, validate_route
from ..rng import stream
from . import _lsref
from .base import SubproblemView, SubsolverBudget, SubsolverError

try:
    if os.environ.get("VRPDELEGATE_PURE"):
        raise ImportError("pure-Python kernel forced")
    from . import _lskernel as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

VARIANT_CODE = {"CVRP": _lsref.CVRP, "CVRPTW": _lsref.CVRPTW, "VRPMPD": _lsref.VRPMPD}

# cities ahead in sweep order considered by the nearest-neighbour step
SWEEP_WINDOW = 10
# steps per kernel call when a wall-clock bound has to be polled
WALL_CHUNK = 25


def kernel(backend: str | None = None):
    """The local-search function for ``backend`` ('cython', 'python' or default)."""
    if backend is None:
        backend = BACKEND
    if backend == "python":
        return _lsref.local_search
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        return _compiled.local_search
    raise ValueError(f"unknown backend {backend!r}")


def _can_append(inst: Instance, route: list[int], city: int) -> bool:
    if inst.variant in (CVRPTW, VRPMPD):
        return validate_route(inst, route + [city]) is None
    return True


def construct(inst: Instance, seed: int) -> list[list[int]]:
    """Sweep from a seeded start angle, growing each route by nearest neighbour.

    A route is extended with the closest of the next ``SWEEP_WINDOW``
    unrouted cities (in sweep order) that can still be appended feasibly, and
    closed when none can.
    """
    xy = inst.xy
    d = inst.dist
    dem = inst.demand
    cap = inst.capacity
    theta0 = stream(seed, "solver").uniform(0.0, 2.0 * math.pi)
    ang = np.mod(np.arctan2(xy[1:, 1] - xy[0, 1], xy[1:, 0] - xy[0, 0]) - theta0, 2.0 * math.pi)
    remaining = [int(i) + 1 for i in np.argsort(ang, kind="stable")]
    routes = []
    while remaining:
        first = remaining.pop(0)
        route = [first]
        if validate_route(inst, route) is not None:
            raise SubsolverError(f"city {first} cannot be served by any route")
        load = int(dem[first])
        while remaining:
            last = route[-1]
            best, best_pos = None, -1
            for pos in range(min(SWEEP_WINDOW, len(remaining))):
                c = remaining[pos]
                if inst.variant != VRPMPD and load + dem[c] > cap:
                    continue
                if best is not None and d[last, c] >= d[last, best]:
                    continue
                if _can_append(inst, route, c):
                    best, best_pos = c, pos
            if best is None:
                break
            route.append(best)
            load += int(dem[best])
            remaining.pop(best_pos)
        routes.append(route)
    return routes


def improve(inst: Instance, routes: list[list[int]], max_steps: int, backend: str | None = None):
    """Run the local-search kernel on ``routes`` in place."""
    ls = kernel(backend)
    return ls(inst.dist, inst.demand, inst.pickup, inst.tw_early, inst.tw_late, inst.service,
              inst.capacity, VARIANT_CODE[inst.variant], routes, max_steps)


class BuiltinSubsolver:
    name = "builtin"

    def __init__(self, backend: str | None = None):
        self.backend = backend or BACKEND
        kernel(self.backend)
        self.calls = 0

    def solve(self, view: SubproblemView | Instance, budget: SubsolverBudget, seed: int) -> Solution:
        inst = view.instance if isinstance(view, SubproblemView) else view
        self.calls += 1
        routes = construct(inst, seed)
        if budget.max_wall is None:
            improve(inst, routes, budget.max_steps, self.backend)
        else:
            deadline = time.perf_counter() + budget.max_wall
            left = budget.max_steps if budget.max_steps is not None else math.inf
            while left > 0 and time.perf_counter() < deadline:
                steps, optimum = improve(inst, routes, int(min(WALL_CHUNK, left)), self.backend)
                left -= steps
                if optimum:
                    break
        return Solution.from_routes(inst, routes)
