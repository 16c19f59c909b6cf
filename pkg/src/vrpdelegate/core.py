"""Domain types, costs and feasibility checks for CVRP, CVRPTW and VRPMPD.

Node 0 is always the depot; cities are numbered 1..N.  Distances are plain
Euclidean doubles, computed everywhere as ``sqrt(dx*dx + dy*dy)`` so that the
distance matrix, per-edge lookups and subproblem views agree bit for bit.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

CVRP = "CVRP"
CVRPTW = "CVRPTW"
VRPMPD = "VRPMPD"
VARIANTS = (CVRP, CVRPTW, VRPMPD)

# absolute tolerance used to classify a cost change as an improvement
COST_EPS = 1e-9


@dataclass(frozen=True)
class City:
    x: float
    y: float
    demand: int = 0
    pickup: int = 0
    tw_early: float = 0.0
    tw_late: float = math.inf
    service: float = 0.0


@dataclass(frozen=True)
class Depot:
    x: float
    y: float
    tw_early: float = 0.0
    tw_late: float = math.inf


@dataclass(frozen=True, eq=False)
class Instance:
    variant: str
    depot: Depot
    capacity: int
    cities: tuple[City, ...]
    name: str = ""

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if len(self.cities) < 1:
            raise ValueError("instance needs at least one city")
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        object.__setattr__(self, "cities", tuple(self.cities))

    @property
    def n(self) -> int:
        return len(self.cities)

    @cached_property
    def xy(self) -> np.ndarray:
        pts = [(self.depot.x, self.depot.y)] + [(c.x, c.y) for c in self.cities]
        return np.asarray(pts, dtype=np.float64)

    @cached_property
    def demand(self) -> np.ndarray:
        return np.array([0] + [c.demand for c in self.cities], dtype=np.int64)

    @cached_property
    def pickup(self) -> np.ndarray:
        return np.array([0] + [c.pickup for c in self.cities], dtype=np.int64)

    @cached_property
    def tw_early(self) -> np.ndarray:
        return np.array([self.depot.tw_early] + [c.tw_early for c in self.cities])

    @cached_property
    def tw_late(self) -> np.ndarray:
        return np.array([self.depot.tw_late] + [c.tw_late for c in self.cities])

    @cached_property
    def service(self) -> np.ndarray:
        return np.array([0.0] + [c.service for c in self.cities])

    @cached_property
    def dist(self) -> np.ndarray:
        return distance_matrix(self.xy)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.variant, self.depot, self.capacity, self.cities) == (
            other.variant, other.depot, other.capacity, other.cities)

    def __hash__(self):
        return hash((self.variant, self.depot, self.capacity, self.cities))


def distance_matrix(xy: np.ndarray) -> np.ndarray:
    dx = xy[:, 0][:, None] - xy[:, 0][None, :]
    dy = xy[:, 1][:, None] - xy[:, 1][None, :]
    return np.sqrt(dx * dx + dy * dy)


def _check_node(instance: Instance, i: int) -> None:
    if not 0 <= i <= instance.n:
        raise IndexError(f"node index {i} outside 0..{instance.n}")


def edge_cost(instance: Instance, i: int, j: int) -> float:
    _check_node(instance, i)
    _check_node(instance, j)
    return float(instance.dist[i, j])


def route_cost(instance: Instance, route: Sequence[int]) -> float:
    d = instance.dist
    prev = 0
    total = 0.0
    for c in route:
        total += d[prev, c]
        prev = c
    total += d[prev, 0]
    return float(total)


@dataclass(frozen=True)
class Solution:
    """A set of depot-anchored routes with cached per-route costs."""

    routes: tuple[tuple[int, ...], ...]
    route_costs: tuple[float, ...] = field(default=(), compare=False)

    @classmethod
    def from_routes(cls, instance: Instance, routes: Iterable[Sequence[int]]) -> "Solution":
        rs = tuple(tuple(int(c) for c in r) for r in routes)
        return cls(rs, tuple(route_cost(instance, r) for r in rs))

    @property
    def cost(self) -> float:
        return float(sum(self.route_costs))

    def __len__(self):
        return len(self.routes)


def solution_cost(instance: Instance, solution: Solution | Sequence[Sequence[int]]) -> float:
    routes = solution.routes if isinstance(solution, Solution) else solution
    return float(sum(route_cost(instance, r) for r in routes))


# --- feasibility -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """First violated constraint.

    ``kind`` is one of ``capacity``, ``time_window``, ``depot_return``,
    ``load`` (route constraints) or ``missing``, ``duplicate``, ``unknown``,
    ``empty_route`` (coverage constraints).  ``position`` is the 1-based
    position in the route, or the offending city index for coverage kinds.
    """

    kind: str
    route: int | None = None
    position: int | None = None
    detail: str = ""

    @property
    def is_coverage(self) -> bool:
        return self.kind in ("missing", "duplicate", "unknown", "empty_route")


def arrival_times(instance: Instance, route: Sequence[int]) -> list[tuple[float, float]]:
    """(arrival, departure) per visited city, then the return to the depot.

    The vehicle leaves the depot at its earliest time and waits at a city that
    it reaches before the window opens.  The last element is the depot return,
    whose departure equals its arrival.
    """
    d = instance.dist
    e, s = instance.tw_early, instance.service
    t = float(e[0])
    prev = 0
    out = []
    for c in route:
        t = max(float(e[c]), t + float(s[prev]) + float(d[prev, c]))
        out.append((t, t + float(s[c])))
        prev = c
    t = t + float(s[prev]) + float(d[prev, 0])
    out.append((t, t))
    return out


def load_profile(instance: Instance, route: Sequence[int]) -> list[int]:
    """Vehicle load leaving the depot followed by the load after each visit."""
    load = int(sum(int(instance.demand[c]) for c in route))
    out = [load]
    for c in route:
        load = load - int(instance.demand[c]) + int(instance.pickup[c])
        out.append(load)
    return out


def validate_route(instance: Instance, route: Sequence[int], route_id: int | None = None) -> Violation | None:
    """Return ``None`` if the route is feasible, else the first violation."""
    C = instance.capacity
    if instance.variant == VRPMPD:
        for pos, load in enumerate(load_profile(instance, route)):
            if load > C or load < 0:
                return Violation("load", route_id, pos, f"load {load} outside [0, {C}]")
        return None

    total = 0
    for pos, c in enumerate(route, start=1):
        total += int(instance.demand[c])
        if total > C:
            return Violation("capacity", route_id, pos, f"demand {total} > {C}")
    if instance.variant == CVRPTW:
        times = arrival_times(instance, route)
        late = instance.tw_late
        for pos, (c, (arr, _)) in enumerate(zip(route, times), start=1):
            if arr > late[c]:
                return Violation("time_window", route_id, pos, f"arrival {arr!r} > {late[c]!r}")
        back = times[-1][0]
        if back > late[0]:
            return Violation("depot_return", route_id, len(route) + 1, f"return {back!r} > {late[0]!r}")
    return None


def validate_solution(instance: Instance, solution: Solution | Sequence[Sequence[int]]) -> Violation | None:
    routes = solution.routes if isinstance(solution, Solution) else solution
    seen = np.zeros(instance.n + 1, dtype=np.int64)
    for r, route in enumerate(routes):
        if len(route) == 0:
            return Violation("empty_route", r)
        for c in route:
            if not 1 <= c <= instance.n:
                return Violation("unknown", r, int(c), "not a city index")
            seen[c] += 1
            if seen[c] > 1:
                return Violation("duplicate", r, int(c))
    missing = np.flatnonzero(seen[1:] == 0)
    if missing.size:
        return Violation("missing", None, int(missing[0]) + 1)
    for r, route in enumerate(routes):
        v = validate_route(instance, route, r)
        if v is not None:
            return v
    return None


# --- JSON --------------------------------------------------------------------


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        raise ValueError("infinite values cannot be serialized")
    return format(v, ".17g")


def _dump(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _num(obj)


def _finite(v: float):
    return None if math.isinf(v) else v


def instance_to_dict(instance: Instance) -> dict:
    # an unbounded time window is written as null
    dp = instance.depot
    return {
        "name": instance.name,
        "variant": instance.variant,
        "capacity": instance.capacity,
        "depot": {"x": dp.x, "y": dp.y, "e": dp.tw_early, "l": _finite(dp.tw_late)},
        "cities": [
            {"x": c.x, "y": c.y, "demand": c.demand, "pickup": c.pickup,
             "e": c.tw_early, "l": _finite(c.tw_late), "service": c.service}
            for c in instance.cities
        ],
    }


def _open(v) -> float:
    return math.inf if v is None else float(v)


def instance_from_dict(d: dict, name: str = "") -> Instance:
    dp = d["depot"]
    return Instance(
        variant=d["variant"],
        capacity=int(d["capacity"]),
        depot=Depot(float(dp["x"]), float(dp["y"]), float(dp.get("e", 0.0)), _open(dp.get("l"))),
        cities=tuple(
            City(float(c["x"]), float(c["y"]), int(c.get("demand", 0)), int(c.get("pickup", 0)),
                 float(c.get("e", 0.0)), _open(c.get("l")), float(c.get("service", 0.0)))
            for c in d["cities"]
        ),
        name=d.get("name") or name,
    )


def dumps_instance(instance: Instance) -> str:
    return _dump(instance_to_dict(instance)) + "\n"


def loads_instance(text: str, name: str = "") -> Instance:
    return instance_from_dict(json.loads(text), name=name)


def dumps_solution(solution: Solution) -> str:
    return _dump({"routes": [list(r) for r in solution.routes]}) + "\n"


def loads_solution(instance: Instance, text: str) -> Solution:
    return Solution.from_routes(instance, json.loads(text)["routes"])


def load_instance(path) -> Instance:
    with open(path) as fh:
        return loads_instance(fh.read(), name=os.path.splitext(os.path.basename(path))[0])


def save_instance(instance: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_instance(instance))


def load_solution(instance: Instance, path) -> Solution:
    with open(path) as fh:
        return loads_solution(instance, fh.read())


def save_solution(solution: Solution, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_solution(solution))
