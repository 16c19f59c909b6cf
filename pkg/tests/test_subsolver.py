import itertools
import math
import os
import sys
import textwrap

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_instance
from vrpdelegate.core import Solution, validate_solution
from vrpdelegate.generate import GenSpec
from vrpdelegate.subsolver import (
    BuiltinSubsolver,
    SubproblemView,
    SubsolverBudget,
    SubsolverConfig,
    SubsolverError,
    make_subsolver,
)
from vrpdelegate.subsolver.builtin import _compiled, construct, improve
from vrpdelegate.subsolver.tsplib import (
    COORD_SCALE,
    TsplibFormatError,
    parse_solution_file,
    read_problem_coords,
    write_problem_file,
    write_solution_file,
)

BIG = SubsolverBudget(10_000)


def brute_force_tour(inst):
    d = inst.dist
    n = inst.n
    perms = np.array(list(itertools.permutations(range(1, n + 1))))
    cost = d[0, perms[:, 0]] + d[perms[:, -1], 0]
    for j in range(n - 1):
        cost = cost + d[perms[:, j], perms[:, j + 1]]
    return cost.min()


def test_single_city(solver):
    inst = make_instance([(0.3, 0.4)])
    sol = solver.solve(inst, BIG, 0)
    assert sol.routes == ((1,),)
    assert sol.cost == pytest.approx(1.0)


def test_eight_city_tsp_near_optimal(solver):
    gaps = []
    for seed in range(50):
        rng = np.random.default_rng(seed)
        inst = make_instance(rng.random((8, 2)).tolist(), capacity=1000, depot=tuple(rng.random(2)))
        sol = solver.solve(inst, BIG, seed)
        assert len(sol.routes) == 1
        gaps.append(sol.cost / brute_force_tour(inst) - 1.0)
    assert np.median(gaps) <= 0.02


@pytest.mark.parametrize("variant", ["CVRP", "CVRPTW", "VRPMPD"])
def test_improvement_never_worse_than_construction(variant):
    for seed in range(10):
        inst = GenSpec(variant, 60, "uniform", 0, seed).build()
        routes = construct(inst, seed)
        before = Solution.from_routes(inst, routes).cost
        improve(inst, routes, 500)
        after = Solution.from_routes(inst, routes)
        assert after.cost <= before + 1e-12
        assert validate_solution(inst, after) is None


def test_deterministic(solver):
    inst = GenSpec("CVRPTW", 50, "uniform", 0, 4).build()
    a = solver.solve(inst, SubsolverBudget(200), 9)
    b = solver.solve(inst, SubsolverBudget(200), 9)
    assert a.routes == b.routes


@given(variant=st.sampled_from(["CVRP", "CVRPTW", "VRPMPD"]), n=st.integers(2, 40),
       seed=st.integers(0, 2**32), steps=st.integers(0, 300), sub=st.integers(0, 2**16))
def test_feasible_on_random_views(variant, n, seed, steps, sub):
    parent = GenSpec(variant, 80, "uniform", 0, seed % 50).build()
    cities = np.random.default_rng(sub).choice(np.arange(1, 81), size=n, replace=False)
    view = SubproblemView.from_parent(parent, cities)
    sol = BuiltinSubsolver().solve(view, SubsolverBudget(steps), seed)
    assert validate_solution(view.instance, sol) is None
    mapped = view.to_parent(sol.routes)
    assert sorted(c for r in mapped for c in r) == sorted(cities.tolist())


@pytest.mark.parametrize("variant", ["CVRP", "CVRPTW", "VRPMPD"])
def test_monotone_budget(solver, variant):
    inst = GenSpec(variant, 80, "uniform", 0, 5).build()
    for b in (1, 5, 20, 80, 300):
        assert solver.solve(inst, SubsolverBudget(2 * b), 3).cost <= solver.solve(inst, SubsolverBudget(b), 3).cost


@pytest.mark.skipif(_compiled is None, reason="compiled kernel not built")
@pytest.mark.parametrize("variant", ["CVRP", "CVRPTW", "VRPMPD"])
def test_backends_agree(variant):
    for seed in range(4):
        inst = GenSpec(variant, 70, "uniform", 0, seed).build()
        a = BuiltinSubsolver("python").solve(inst, SubsolverBudget(400), seed)
        b = BuiltinSubsolver("cython").solve(inst, SubsolverBudget(400), seed)
        assert a.routes == b.routes


def test_wall_budget_runs(solver):
    inst = GenSpec("CVRP", 60, "uniform", 0, 5).build()
    sol = solver.solve(inst, SubsolverBudget(None, 0.05), 0)
    assert validate_solution(inst, sol) is None


def test_budget_needs_a_bound():
    with pytest.raises(ValueError):
        SubsolverBudget(None, None)
    with pytest.raises(ValueError):
        SubsolverBudget(-1)


def test_view_validation():
    parent = GenSpec("CVRP", 10, "uniform", 0, 0).build()
    with pytest.raises(ValueError):
        SubproblemView.from_parent(parent, [])
    with pytest.raises(ValueError):
        SubproblemView.from_parent(parent, [1, 1])
    with pytest.raises(IndexError):
        SubproblemView.from_parent(parent, [11])


# TSPLIB files

def _view(n=9, seed=0):
    parent = GenSpec("CVRP", 30, "uniform", 0, seed).build()
    return SubproblemView.from_parent(parent, list(range(3, 3 + n)))


def test_tsplib_round_trip(tmp_path):
    view = _view()
    write_problem_file(view, tmp_path / "p.vrp")
    text = (tmp_path / "p.vrp").read_text()
    assert "DIMENSION : 10" in text and "TYPE : CVRP" in text
    coords = read_problem_coords(tmp_path / "p.vrp")
    assert len(coords) == 10
    for node, (x, y) in coords.items():
        assert abs(x - view.instance.xy[node - 1, 0]) <= 1e-6
        assert abs(y - view.instance.xy[node - 1, 1]) <= 1e-6
    routes = [[1, 4, 2], [3, 9], [5, 6, 7, 8]]
    write_solution_file(routes, tmp_path / "s.sol")
    sol = parse_solution_file(view, tmp_path / "s.sol")
    assert [list(r) for r in sol.routes] == routes
    assert COORD_SCALE == 10**6


def test_tsplib_parse_errors(tmp_path):
    view = _view()
    p = tmp_path / "bad.sol"
    p.write_text("Route #1: 1 2\nRoute #2: 3 x\n")
    with pytest.raises(TsplibFormatError, match=":2:"):
        parse_solution_file(view, p)
    p.write_text("1 2 99\n")
    with pytest.raises(TsplibFormatError, match="outside"):
        parse_solution_file(view, p)
    p.write_text("Cost 12\n")
    with pytest.raises(TsplibFormatError):
        parse_solution_file(view, p)


FAKE_SOLVER = textwrap.dedent("""
    import sys, time
    src, dst, mode = sys.argv[1], sys.argv[2], sys.argv[3]
    n = 0
    for line in open(src):
        if line.startswith("DIMENSION"):
            n = int(line.split(":")[1]) - 1
    if mode == "fail":
        sys.exit(3)
    if mode == "sleep":
        time.sleep(5)
    if mode == "silent":
        sys.exit(0)
    with open(dst, "w") as fh:
        if mode == "bad":
            fh.write("Route #1: 1 1\\n")
        else:
            for c in range(1, n + 1):
                fh.write(f"Route #{c}: {c}\\n")
""")


@pytest.fixture()
def fake_solver(tmp_path):
    path = tmp_path / "fake_solver.py"
    path.write_text(FAKE_SOLVER)
    return path


def _external(script, mode, timeout=30.0):
    return make_subsolver(SubsolverConfig("external", f"{sys.executable} {script} {{in}} {{out}} {mode}",
                                          timeout=timeout))


def test_external_ok(fake_solver):
    view = _view()
    sol = _external(fake_solver, "ok").solve(view, SubsolverBudget(10), 0)
    assert len(sol.routes) == view.n and validate_solution(view.instance, sol) is None


@pytest.mark.parametrize("mode,msg", [("fail", "exited with 3"), ("silent", "no solution file"),
                                      ("bad", "infeasible")])
def test_external_errors_surface(fake_solver, mode, msg):
    with pytest.raises(SubsolverError, match=msg):
        _external(fake_solver, mode).solve(_view(), SubsolverBudget(10), 0)


def test_external_timeout(fake_solver):
    with pytest.raises(SubsolverError, match="timed out"):
        _external(fake_solver, "sleep", timeout=0.5).solve(_view(), SubsolverBudget(10), 0)


def test_external_config_needs_placeholders():
    with pytest.raises(ValueError):
        SubsolverConfig("external", "solver {in}")
    with pytest.raises(ValueError):
        make_subsolver("lkh")


LKH = os.environ.get("VRPDELEGATE_LKH_CMD")


@pytest.mark.skipif(not LKH, reason="set VRPDELEGATE_LKH_CMD to an external solver template")
def test_external_real_solver():
    view = _view(n=40)
    sol = make_subsolver("external:" + LKH).solve(view, SubsolverBudget(100), 1)
    assert validate_solution(view.instance, sol) is None
