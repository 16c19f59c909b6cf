"""Trace metrics: step-function cost curves, improvement and speedup.

A trace is read as a right-continuous step function of one of three axes:
wall seconds (``time``), cumulative subsolver calls (``calls``) or delegation
step index (``step``).  All functions here are pure.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..core import COST_EPS
from ..trace import RunTrace

AXES = ("time", "calls", "step")


class NoImprovement(ValueError):
    """The reference trace never improved, so quality thresholds are undefined."""


def _axis(trace: RunTrace, axis: str) -> np.ndarray:
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    return np.array([getattr(e, axis) for e in trace.events], dtype=np.float64)


def _costs(trace: RunTrace) -> np.ndarray:
    return np.array([e.cost for e in trace.events], dtype=np.float64)


def cost_at(trace: RunTrace, t: float, axis: str = "time") -> float:
    """Cost of the last event at or before ``t``; the initial cost before any event."""
    xs = _axis(trace, axis)
    i = int(np.searchsorted(xs, t, side="right")) - 1
    return float(trace.events[max(i, 0)].cost)


def _check_pair(y: RunTrace, x: RunTrace) -> None:
    if y.instance_id != x.instance_id:
        raise ValueError(f"traces are for different instances: {y.instance_id!r} vs {x.instance_id!r}")


def improvement_over(trace_y: RunTrace, trace_x: RunTrace, t: float, axis: str = "time") -> float:
    """How much more Y has improved than X by ``t`` (positive when Y is ahead)."""
    _check_pair(trace_y, trace_x)
    return cost_at(trace_x, t, axis) - cost_at(trace_y, t, axis)


def quality_at_fraction(trace: RunTrace, q: float) -> float:
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    gain = trace.init_cost - trace.final_cost
    if gain <= COST_EPS:
        raise NoImprovement(f"trace {trace.instance_id!r}/{trace.method!r} did not improve")
    if q == 1.0:
        return trace.final_cost
    return trace.init_cost - q * gain


def first_crossing(trace: RunTrace, threshold: float, axis: str = "time") -> float | None:
    """Axis value of the first event with cost at or below ``threshold``."""
    hit = np.flatnonzero(_costs(trace) <= threshold)
    if len(hit) == 0:
        return None
    return float(_axis(trace, axis)[hit[0]])


def speedup_at(trace_y: RunTrace, trace_x: RunTrace, q: float = 0.95, axis: str = "time") -> float | None:
    """X's time to reach its own q-quality over Y's time to reach it; None if Y never does."""
    _check_pair(trace_y, trace_x)
    thr = quality_at_fraction(trace_x, q)
    tx = first_crossing(trace_x, thr, axis)
    ty = first_crossing(trace_y, thr, axis)
    if ty is None:
        return None
    if ty == tx:
        return 1.0
    if ty == 0.0:
        return None
    return tx / ty


def mean_se(values: Sequence[float]) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0:
        return math.nan, math.nan
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    return float(v.mean()), se


def geomean_se(values: Sequence[float]) -> tuple[float, float]:
    """Geometric mean and its delta-method standard error."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0:
        return math.nan, math.nan
    if np.any(v <= 0):
        raise ValueError("geometric mean needs positive values")
    m, se = mean_se(np.log(v))
    g = math.exp(m)
    return g, g * se


def pair_traces(traces: Sequence[RunTrace], baseline: Sequence[RunTrace]) -> list[tuple[RunTrace, RunTrace]]:
    """Match each trace with the baseline run on the same instance and seed."""
    ref = {(b.instance_id, b.seed): b for b in baseline}
    return [(t, ref[(t.instance_id, t.seed)]) for t in traces if (t.instance_id, t.seed) in ref]
