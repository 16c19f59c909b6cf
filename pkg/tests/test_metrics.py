import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from numerics import staircase
from vrpdelegate.harness import (
    NoImprovement,
    cost_at,
    first_crossing,
    geomean_se,
    improvement_over,
    mean_se,
    quality_at_fraction,
    speedup_at,
)
from vrpdelegate.harness.metrics import pair_traces
from vrpdelegate.trace import RunTrace

X = staircase([(0, 100), (10, 95), (40, 90), (100, 81), (150, 80)], method="x")
Y = staircase([(0, 100), (5, 90), (20, 81), (30, 78)], method="y")


def test_cost_at():
    assert cost_at(X, 0) == 100
    assert cost_at(X, 9.99) == 100
    assert cost_at(X, 10) == 95
    assert cost_at(X, 1e9) == 80
    assert cost_at(X, 2, axis="calls") == 90
    assert cost_at(X, -1) == 100


def test_cost_at_replay():
    rng = np.random.default_rng(0)
    pts = [(0.0, 50.0)]
    for _ in range(30):
        pts.append((pts[-1][0] + rng.exponential(), pts[-1][1] - rng.random()))
    tr = staircase(pts)
    for t in np.linspace(0, pts[-1][0] + 1, 200):
        want = pts[0][1]
        for tt, c in pts:
            if tt <= t:
                want = c
        assert cost_at(tr, t) == want


def test_improvement_over_hand_values():
    want = {0: 0, 5: 10, 10: 5, 20: 14, 30: 17, 40: 12, 100: 3, 150: 2}
    for t, v in want.items():
        assert improvement_over(Y, X, t) == v
    assert improvement_over(X, X, 50) == 0


@given(st.floats(0, 200))
def test_improvement_antisymmetric(t):
    assert improvement_over(Y, X, t) == -improvement_over(X, Y, t)


def test_mismatched_instances():
    other = staircase([(0, 100), (1, 90)], instance_id="other")
    with pytest.raises(ValueError):
        improvement_over(other, X, 1.0)
    with pytest.raises(ValueError):
        speedup_at(other, X)


def test_quality_at_fraction():
    assert quality_at_fraction(X, 1.0) == 80
    assert quality_at_fraction(X, 0.95) == pytest.approx(81.0)
    qs = np.linspace(0.05, 1.0, 20)
    th = [quality_at_fraction(X, q) for q in qs]
    assert all(b < a for a, b in zip(th, th[1:]))
    with pytest.raises(ValueError):
        quality_at_fraction(X, 0.0)
    with pytest.raises(NoImprovement):
        quality_at_fraction(staircase([(0, 5), (1, 5)]), 0.5)


def test_speedup_hand_values():
    # X's 95% threshold is 81: X crosses at 100, Y at 20
    assert speedup_at(Y, X, 0.95) == 5.0
    # 50% threshold 90: X at 40, Y at 5
    assert speedup_at(Y, X, 0.5) == 8.0
    # on the calls axis X crosses 81 at call 3, Y at call 2
    assert speedup_at(Y, X, 0.95, axis="calls") == 1.5


def test_speedup_simple_example():
    x = staircase([(0, 10), (100, 5)])
    y = staircase([(0, 10), (20, 5)])
    assert speedup_at(y, x, 1.0) == 5.0


def test_speedup_self_is_one():
    for q in np.linspace(0.05, 1.0, 20):
        assert speedup_at(X, X, q) == 1.0
        assert speedup_at(Y, Y, q) == 1.0


def test_speedup_undefined_when_never_reached():
    slow = staircase([(0, 100), (50, 99)])
    assert speedup_at(slow, X, 0.95) is None


def test_first_crossing():
    assert first_crossing(X, 90) == 40
    assert first_crossing(X, 79) is None


def test_mean_se_and_geomean():
    m, se = mean_se([1.0, 2.0, 3.0])
    assert m == 2.0 and se == pytest.approx(1.0 / math.sqrt(3))
    assert mean_se([4.0]) == (4.0, 0.0)
    assert all(math.isnan(v) for v in mean_se([]))
    g, gse = geomean_se([2.0, 8.0])
    assert g == pytest.approx(4.0)
    assert gse == pytest.approx(4.0 * math.log(2.0))
    with pytest.raises(ValueError):
        geomean_se([1.0, 0.0])


def test_pair_traces():
    a = [staircase([(0, 1)], "i1", "a", 0), staircase([(0, 1)], "i2", "a", 0)]
    b = [staircase([(0, 1)], "i2", "b", 0)]
    pairs = pair_traces(a, b)
    assert len(pairs) == 1 and pairs[0][0].instance_id == "i2"


def test_trace_jsonl_round_trip(tmp_path):
    X.save(tmp_path / "t.jsonl")
    back = RunTrace.load(tmp_path / "t.jsonl")
    assert back.events == X.events and back.method == "x"
