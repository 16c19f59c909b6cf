"""The delegation loop: build route-neighbourhood subproblems, pick one, re-solve
it from scratch, and keep the result only if it is strictly cheaper.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import COST_EPS, Instance, Solution
from .rng import derive_seed
from .subsolver.base import SubproblemView, SubsolverBudget, SubsolverError
from .trace import RunTrace, StepRecord


class SelectionExhausted(Exception):
    """Every candidate subproblem is masked."""


def city_signature(cities) -> str:
    arr = np.sort(np.fromiter((int(c) for c in cities), dtype="<i8"))
    return hashlib.blake2b(arr.tobytes(), digest_size=12).hexdigest()


@dataclass(frozen=True, eq=False)
class SubproblemRef:
    center_route: int
    member_routes: tuple[int, ...]
    cities: tuple[int, ...]
    signature: str
    current_cost: float
    center_centroid: tuple[float, float]
    center_cities: tuple[int, ...]

    @property
    def city_set(self) -> frozenset:
        return frozenset(self.cities)


def route_centroids(instance: Instance, solution: Solution) -> np.ndarray:
    xy = instance.xy
    return np.array([xy[list(r)].mean(axis=0) for r in solution.routes]).reshape(-1, 2)


def knn_routes(centroids: np.ndarray, center: int, k: int) -> tuple[int, ...]:
    """The ``k`` routes nearest to ``center`` by centroid distance, center first.

    Ties are broken by lower route id.
    """
    diff = centroids - centroids[center]
    dist = np.sqrt(diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1])
    not_center = np.ones(len(centroids), dtype=np.int64)
    not_center[center] = 0
    ids = np.arange(len(centroids))
    order = np.lexsort((ids, not_center, dist))
    return tuple(int(i) for i in order[: min(k, len(centroids))])


def construct_subproblems(instance: Instance, solution: Solution, k: int, dedup: bool = True) -> list[SubproblemRef]:
    if k < 1:
        raise ValueError("k must be >= 1")
    cents = route_centroids(instance, solution)
    out = []
    seen = set()
    for r in range(len(solution.routes)):
        members = knn_routes(cents, r, k)
        cities = tuple(sorted(c for m in members for c in solution.routes[m]))
        sig = city_signature(cities)
        if dedup and sig in seen:
            continue
        seen.add(sig)
        cost = float(sum(solution.route_costs[m] for m in members))
        out.append(SubproblemRef(r, tuple(sorted(members)), cities, sig, cost,
                                 (float(cents[r, 0]), float(cents[r, 1])), solution.routes[r]))
    return out


@dataclass
class Subsolution:
    routes: tuple[tuple[int, ...], ...]  # parent indices
    route_costs: tuple[float, ...]
    cities: frozenset

    @property
    def cost(self) -> float:
        return float(sum(self.route_costs))


@dataclass
class SelectionState:
    """Masks, heuristic bookkeeping and caches shared by all selectors.

    Caches and masks are keyed by city-set signature.  Whenever a step is
    accepted, every entry whose city set meets the replaced routes is dropped.
    """

    n_cities: int
    mask: dict[str, frozenset] = field(default_factory=dict)
    counts: np.ndarray = None
    history: list[tuple[float, float]] = field(default_factory=list)
    sub_cache: dict[str, Subsolution] = field(default_factory=dict)
    pred_cache: dict[str, tuple[float, frozenset]] = field(default_factory=dict)
    calls: int = 0
    cache_hits: int = 0

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros(self.n_cities + 1, dtype=np.int64)

    def unmasked(self, candidates: Sequence[SubproblemRef]) -> list[SubproblemRef]:
        return [c for c in candidates if c.signature not in self.mask]

    def subsolve(self, instance: Instance, cand: SubproblemRef, subsolver, budget: SubsolverBudget,
                 seed: int) -> Subsolution:
        hit = self.sub_cache.get(cand.signature)
        if hit is not None:
            self.cache_hits += 1
            return hit
        view = SubproblemView.from_parent(instance, cand.cities)
        self.calls += 1
        sol = subsolver.solve(view, budget, subsolve_seed(seed, cand.signature))
        sub = Subsolution(tuple(view.to_parent(sol.routes)), sol.route_costs, cand.city_set)
        self.sub_cache[cand.signature] = sub
        return sub

    def record_selection(self, cand: SubproblemRef) -> None:
        self.counts[list(cand.cities)] += 1
        self.history.append(cand.center_centroid)

    def invalidate(self, touched: frozenset) -> None:
        for sig in [s for s, cs in self.mask.items() if not cs.isdisjoint(touched)]:
            del self.mask[sig]
        for sig in [s for s, sub in self.sub_cache.items() if not sub.cities.isdisjoint(touched)]:
            del self.sub_cache[sig]
        for sig in [s for s, (_, cs) in self.pred_cache.items() if not cs.isdisjoint(touched)]:
            del self.pred_cache[sig]


def subsolve_seed(seed: int, signature: str) -> int:
    """Per-subproblem seed, so re-solving a city set always gives the same answer."""
    return derive_seed(seed, "subproblem", signature)


def splice(instance: Instance, solution: Solution, cand: SubproblemRef, sub: Subsolution) -> Solution:
    members = set(cand.member_routes)
    keep = [i for i in range(len(solution.routes)) if i not in members]
    routes = tuple(solution.routes[i] for i in keep) + tuple(sub.routes)
    costs = tuple(solution.route_costs[i] for i in keep) + tuple(sub.route_costs)
    return Solution(routes, costs)


@dataclass
class StepContext:
    instance: Instance
    solution: Solution
    subsolver: object
    budget: SubsolverBudget
    seed: int
    state: SelectionState


def delegate_step(instance: Instance, solution: Solution, state: SelectionState, selector, subsolver, k: int,
                  budget: SubsolverBudget, seed: int, step: int = 0, t0: float | None = None,
                  candidates: list[SubproblemRef] | None = None) -> tuple[Solution, StepRecord]:
    """One select / solve / hill-climb step.

    Raises :class:`SelectionExhausted` when every candidate is masked.
    """
    if t0 is None:
        t0 = time.perf_counter()
    if candidates is None:
        candidates = construct_subproblems(instance, solution, k)
    ctx = StepContext(instance, solution, subsolver, budget, seed, state)
    cand = selector.select(candidates, state, ctx)
    state.record_selection(cand)
    try:
        sub = state.subsolve(instance, cand, subsolver, budget, seed)
    except SubsolverError as exc:
        state.mask[cand.signature] = cand.city_set
        rec = StepRecord(step, time.perf_counter() - t0, solution.cost, False, None, state.calls,
                         cand.center_route, cand.signature, len(candidates), str(exc))
        return solution, rec
    delta = cand.current_cost - sub.cost
    if delta > COST_EPS:
        new = splice(instance, solution, cand, sub)
        state.invalidate(cand.city_set)
        # the new routes are exactly this subsolution, so it can never improve them
        state.sub_cache[cand.signature] = sub
        accepted = True
    else:
        new = solution
        state.mask[cand.signature] = cand.city_set
        accepted = False
    rec = StepRecord(step, time.perf_counter() - t0, new.cost, accepted, delta, state.calls,
                     cand.center_route, cand.signature, len(candidates))
    return new, rec


def run(instance: Instance, initial: Solution, selector, subsolver, k: int = 5, max_steps: int | None = None,
        wall_budget: float | None = None, budget: SubsolverBudget | None = None, seed: int = 0,
        state: SelectionState | None = None, method: str = "", on_step=None) -> tuple[Solution, RunTrace]:
    """Iterate :func:`delegate_step` until ``max_steps``, ``wall_budget`` or exhaustion."""
    budget = budget or SubsolverBudget()
    state = state or SelectionState(instance.n)
    trace = RunTrace(instance_id=instance.name, method=method or getattr(selector, "name", ""), seed=seed)
    t0 = time.perf_counter()
    trace.append(StepRecord(0, 0.0, initial.cost, False, None, state.calls))
    solution = initial
    step = 0
    while max_steps is None or step < max_steps:
        if wall_budget is not None and time.perf_counter() - t0 >= wall_budget:
            break
        try:
            solution, rec = delegate_step(instance, solution, state, selector, subsolver, k, budget, seed,
                                          step=step + 1, t0=t0)
        except SelectionExhausted:
            break
        step += 1
        trace.append(rec)
        if on_step is not None:
            on_step(solution, rec)
    return solution, trace
