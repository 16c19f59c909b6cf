import itertools

import numpy as np
import pytest

from conftest import make_instance
from vrpdelegate.core import Solution, validate_solution
from vrpdelegate.delegation import (
    SelectionExhausted,
    SelectionState,
    Subsolution,
    city_signature,
    construct_subproblems,
    delegate_step,
    route_centroids,
    run,
    splice,
)
from vrpdelegate.generate import GenSpec
from vrpdelegate.initializer import initialize, random_chain
from vrpdelegate.selectors import CountSelector, RandomSelector
from vrpdelegate.subsolver import SubsolverBudget

B = SubsolverBudget(200)


def random_solution(inst, rng, n_routes):
    perm = rng.permutation(inst.n) + 1
    cuts = np.sort(rng.choice(np.arange(1, inst.n), size=n_routes - 1, replace=False))
    return Solution.from_routes(inst, [list(map(int, p)) for p in np.split(perm, cuts)])


def oracle_members(inst, sol, center, k):
    # full sort by (distance, not-center, id), independent of the library's vectorized form
    cents = [np.mean([inst.xy[c] for c in r], axis=0) for r in sol.routes]
    keyed = []
    for j, cj in enumerate(cents):
        d = float(np.hypot(*(cj - cents[center])))
        keyed.append((d, j != center, j))
    keyed.sort()
    return tuple(sorted(j for _, _, j in keyed[:k]))


def test_centroids():
    inst = make_instance([(0.2, 0.4), (0.0, 0.0), (1.0, 1.0)])
    sol = Solution.from_routes(inst, [[1], [2, 3]])
    assert route_centroids(inst, sol).tolist() == [[0.2, 0.4], [0.5, 0.5]]


def test_centroids_random():
    inst = GenSpec("CVRP", 40, "uniform", 0, 1).build()
    sol = random_solution(inst, np.random.default_rng(0), 7)
    for r, c in zip(sol.routes, route_centroids(inst, sol)):
        xs = [inst.cities[i - 1].x for i in r]
        ys = [inst.cities[i - 1].y for i in r]
        assert c == pytest.approx([sum(xs) / len(xs), sum(ys) / len(ys)], abs=1e-15)


def test_three_centroid_example():
    inst = make_instance([(0.0, 0.0), (0.1, 0.0), (0.9, 0.0)], depot=(0.5, 0.5))
    sol = Solution.from_routes(inst, [[1], [2], [3]])
    cands = construct_subproblems(inst, sol, 2)
    assert cands[0].member_routes == (0, 1)


def test_single_route():
    inst = GenSpec("CVRP", 5, "uniform", 0, 1).build()
    sol = Solution.from_routes(inst, [[1, 2, 3, 4, 5]])
    cands = construct_subproblems(inst, sol, 5)
    assert len(cands) == 1 and cands[0].member_routes == (0,)


def test_k_must_be_positive():
    inst = GenSpec("CVRP", 5, "uniform", 0, 1).build()
    with pytest.raises(ValueError):
        construct_subproblems(inst, Solution.from_routes(inst, [[1, 2, 3, 4, 5]]), 0)


def test_knn_matches_brute_force_oracle():
    inst = GenSpec("CVRP", 120, "uniform", 0, 2).build()
    rng = np.random.default_rng(3)
    for trial in range(60):
        sol = random_solution(inst, rng, int(rng.integers(1, 31)))
        for k in (1, 2, 5, 10, 40):
            raw = construct_subproblems(inst, sol, k, dedup=False)
            assert len(raw) == len(sol.routes)
            for cand in raw:
                assert cand.member_routes == oracle_members(inst, sol, cand.center_route, k)
                assert cand.center_route in cand.member_routes
                assert cand.current_cost == pytest.approx(sum(sol.route_costs[m] for m in cand.member_routes))


def test_dedup_keeps_lowest_route_id():
    inst = GenSpec("CVRP", 60, "uniform", 0, 2).build()
    sol = random_solution(inst, np.random.default_rng(1), 6)
    raw = construct_subproblems(inst, sol, 6, dedup=False)
    dd = construct_subproblems(inst, sol, 6)
    assert len(raw) == 6 and len(dd) == 1 and dd[0].center_route == 0


def test_signature_order_independent():
    assert city_signature([3, 1, 2]) == city_signature((2, 3, 1))
    assert city_signature([1, 2]) != city_signature([1, 3])


def test_splice_arithmetic():
    inst = GenSpec("CVRP", 30, "uniform", 0, 4).build()
    sol = random_solution(inst, np.random.default_rng(2), 6)
    cand = construct_subproblems(inst, sol, 3)[0]
    # re-route the subproblem's cities one per route
    singles = tuple((c,) for c in cand.cities)
    sub = Subsolution(singles, tuple(Solution.from_routes(inst, singles).route_costs), cand.city_set)
    new = splice(inst, sol, cand, sub)
    delta = cand.current_cost - sub.cost
    assert new.cost == pytest.approx(sol.cost - delta, abs=1e-12)
    assert validate_solution(inst, new) is None


class EchoSolver:
    """Returns the incumbent routes for whatever cities it is given."""

    name = "echo"

    def __init__(self, instance, solution):
        self.routes = solution.routes

    def solve(self, view, budget, seed):
        local = {c: i for i, c in enumerate(view.origin)}
        routes = [[local[c] for c in r] for r in self.routes if r[0] in local]
        return Solution.from_routes(view.instance, routes)


def test_zero_delta_rejected_and_masked():
    inst = GenSpec("CVRP", 40, "uniform", 0, 5).build()
    sol = random_solution(inst, np.random.default_rng(0), 5)
    state = SelectionState(inst.n)
    new, rec = delegate_step(inst, sol, state, CountSelector(), EchoSolver(inst, sol), 3, B, 0)
    assert rec.delta == pytest.approx(0.0, abs=1e-12) and not rec.accepted
    assert new is sol and rec.signature in state.mask


def test_improvement_accepted(solver):
    inst = GenSpec("CVRP", 60, "uniform", 0, 5).build()
    sol = random_chain(inst, 0)
    state = SelectionState(inst.n)
    new, rec = delegate_step(inst, sol, state, CountSelector(), solver, 3, B, 0)
    assert rec.accepted and rec.delta > 0
    assert new.cost == pytest.approx(sol.cost - rec.delta, abs=1e-9)
    assert validate_solution(inst, new) is None


def test_t_zero_returns_initial(solver):
    inst = GenSpec("CVRP", 30, "uniform", 0, 5).build()
    sol = random_chain(inst, 0)
    out, trace = run(inst, sol, RandomSelector(0), solver, k=3, max_steps=0)
    assert out is sol and len(trace.events) == 1


def held_karp(d):
    n = len(d) - 1
    full = (1 << n) - 1
    dp = {(1 << j, j): d[0][j + 1] for j in range(n)}
    for size in range(2, n + 1):
        for subset in itertools.combinations(range(n), size):
            mask = sum(1 << j for j in subset)
            for j in subset:
                prev = mask & ~(1 << j)
                dp[(mask, j)] = min(dp[(prev, i)] + d[i + 1][j + 1] for i in subset if i != j)
    return min(dp[(full, j)] + d[j + 1][0] for j in range(n))


def test_exhaustion_on_optimal_instance(solver):
    rng = np.random.default_rng(4)
    inst = make_instance(rng.random((10, 2)).tolist(), capacity=1000)
    opt = held_karp(inst.dist.tolist())
    # start from the brute-force optimum found by an exhaustive built-in solve
    best = solver.solve(inst, SubsolverBudget(100_000), 0)
    assert best.cost >= opt - 1e-9
    out, trace = run(inst, best, RandomSelector(0), solver, k=5, max_steps=100)
    assert len(trace.events) == 2 and not trace.events[1].accepted
    assert out is best


def test_state_empty_raises():
    inst = GenSpec("CVRP", 10, "uniform", 0, 0).build()
    sol = random_chain(inst, 0)
    state = SelectionState(inst.n)
    for c in construct_subproblems(inst, sol, 2):
        state.mask[c.signature] = c.city_set
    with pytest.raises(SelectionExhausted):
        delegate_step(inst, sol, state, RandomSelector(0), None, 2, B, 0)


class FailingSolver:
    name = "failing"

    def solve(self, view, budget, seed):
        from vrpdelegate.subsolver import SubsolverError
        raise SubsolverError("boom")


def test_subsolver_failure_masks_and_records():
    inst = GenSpec("CVRP", 20, "uniform", 0, 0).build()
    sol = random_chain(inst, 0)
    state = SelectionState(inst.n)
    new, rec = delegate_step(inst, sol, state, RandomSelector(0), FailingSolver(), 2, B, 0)
    assert new is sol and rec.error == "boom" and rec.signature in state.mask


@pytest.mark.parametrize("variant", ["CVRP", "CVRPTW", "VRPMPD"])
def test_runs_monotone_and_feasible(solver, variant):
    for seed in range(4):
        inst = GenSpec(variant, 200, "uniform", 0, seed).build()
        x0 = initialize(inst, solver, L=20, seed=seed)
        sols = []
        out, trace = run(inst, x0, RandomSelector(seed), solver, k=4, max_steps=40, seed=seed,
                         budget=SubsolverBudget(150), on_step=lambda s, r: sols.append(s))
        costs = [e.cost for e in trace.events]
        assert all(b <= a + 1e-12 for a, b in zip(costs, costs[1:]))
        assert all(validate_solution(inst, s) is None for s in sols)
        assert out.cost <= x0.cost


def test_cache_eviction_on_touch(solver):
    inst = GenSpec("CVRP", 100, "uniform", 0, 1).build()
    sol = random_chain(inst, 1)
    state = SelectionState(inst.n)
    new, rec = delegate_step(inst, sol, state, CountSelector(), solver, 3, B, 0)
    assert rec.accepted
    touched = next(c for c in construct_subproblems(inst, sol, 3) if c.signature == rec.signature).city_set
    for sig, sub in state.sub_cache.items():
        assert sig == rec.signature or sub.cities.isdisjoint(touched)
