"""Angular-sector sweep initialization.

Sector boundaries start at the positive x-axis and run counter-clockwise
around the depot.  Each sector is solved as an independent subproblem with a
budget of ``L`` subsolver steps; ``L = 0`` instead chains cities in a random
order, opening a new route whenever the next city does not fit.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Instance, Solution, validate_route
from .rng import derive_seed, stream
from .subsolver.base import SubproblemView, SubsolverBudget


def sweep_partition(instance: Instance, n_sectors: int) -> list[list[int]]:
    """City indices per sector; a city on top of the depot goes to sector 0."""
    if n_sectors < 1:
        raise ValueError("n_sectors must be >= 1")
    rel = instance.xy[1:] - instance.xy[0]
    frac = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2.0 * math.pi) / (2.0 * math.pi)
    sector = np.minimum((frac * n_sectors).astype(np.int64), n_sectors - 1)
    sector[(rel[:, 0] == 0.0) & (rel[:, 1] == 0.0)] = 0
    return [[int(i) + 1 for i in np.flatnonzero(sector == s)] for s in range(n_sectors)]


def sector_seed(seed: int, sector: int) -> int:
    return derive_seed(seed, "sector", sector)


def random_chain(instance: Instance, seed: int) -> Solution:
    order = stream(seed, "chain").permutation(instance.n) + 1
    routes: list[list[int]] = []
    cur: list[int] = []
    for c in order:
        c = int(c)
        if cur and validate_route(instance, cur + [c]) is None:
            cur.append(c)
            continue
        if cur:
            routes.append(cur)
        cur = [c]
    routes.append(cur)
    return Solution.from_routes(instance, routes)


def initialize(instance: Instance, subsolver, L: int = 100, n_sectors: int = 10, seed: int = 0) -> Solution:
    if L < 0:
        raise ValueError("L must be >= 0")
    if L == 0:
        return random_chain(instance, seed)
    budget = SubsolverBudget(max_steps=L)
    routes = []
    for s, cities in enumerate(sweep_partition(instance, n_sectors)):
        if not cities:
            continue
        view = SubproblemView.from_parent(instance, cities)
        sub = subsolver.solve(view, budget, sector_seed(seed, s))
        routes.extend(view.to_parent(sub.routes))
    return Solution.from_routes(instance, routes)
