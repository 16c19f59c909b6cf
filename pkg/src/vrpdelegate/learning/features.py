"""Subproblem featurization.

Per-city features are ``(x - x_depot, y - y_depot, load / C)``.  The load is
the delivery demand for CVRP and CVRPTW; for VRPMPD it is the delivery minus
the pickup, so pickup cities get a negative value.

Summary features (33 values, permutation invariant):

====  ==========================================================
0     city count / 1000
1-4   bounding box min x, min y, max x, max y (depot relative)
5-6   population std of x and y
7-16  deciles 0.1..1.0 of distance to the depot
17-26 deciles 0.1..1.0 of distance to the subproblem centroid
27-32 load sum, mean, std, min, max, median (all / C)
====  ==========================================================
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import Instance

N_SUMMARY = 33
DECILES = np.linspace(0.1, 1.0, 10)


@dataclass(frozen=True, eq=False)
class SubproblemData:
    """What a model sees of a subproblem: depot-relative cities and capacity."""

    rel_xy: np.ndarray   # (n, 2)
    load: np.ndarray     # (n,) signed load per city
    capacity: float

    @property
    def n(self) -> int:
        return len(self.load)

    def city_features(self) -> np.ndarray:
        return np.column_stack([self.rel_xy, self.load / self.capacity])


def subproblem_features(instance: Instance, cities: Sequence[int]) -> SubproblemData:
    idx = np.fromiter((int(c) for c in cities), dtype=np.int64)
    rel = instance.xy[idx] - instance.xy[0]
    load = (instance.demand[idx] - instance.pickup[idx]).astype(np.float64)
    return SubproblemData(rel, load, float(instance.capacity))


def pad_subproblems(sps: Sequence[SubproblemData]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack subproblems into ``xy (B, n, 2)``, ``q (B, n)`` (load / C) and a boolean mask."""
    n = max(sp.n for sp in sps)
    xy = np.zeros((len(sps), n, 2))
    q = np.zeros((len(sps), n))
    mask = np.zeros((len(sps), n), dtype=bool)
    for b, sp in enumerate(sps):
        xy[b, : sp.n] = sp.rel_xy
        q[b, : sp.n] = sp.load / sp.capacity
        mask[b, : sp.n] = True
    return xy, q, mask


def masked_quantiles(v: np.ndarray, mask: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Row-wise linear-interpolation quantiles over the masked entries of ``v``."""
    s = np.sort(np.where(mask, v, np.inf), axis=1)
    cnt = mask.sum(1)
    h = (cnt[:, None] - 1) * probs[None, :]
    lo = np.floor(h).astype(np.int64)
    hi = np.minimum(lo + 1, cnt[:, None] - 1)
    a = np.take_along_axis(s, lo, 1)
    b = np.take_along_axis(s, hi, 1)
    return a + (h - lo) * (b - a)


def _masked_std(v, mask, cnt):
    mu = np.where(mask, v, 0.0).sum(1) / cnt
    d = np.where(mask, v - mu[:, None], 0.0)
    return np.sqrt((d * d).sum(1) / cnt)


def summary_features_padded(xy: np.ndarray, q: np.ndarray, mask: np.ndarray) -> np.ndarray:
    cnt = mask.sum(1).astype(np.float64)
    m3 = mask[:, :, None]
    out = np.empty((len(xy), N_SUMMARY))
    out[:, 0] = cnt / 1000.0
    out[:, 1:3] = np.where(m3, xy, np.inf).min(1)
    out[:, 3:5] = np.where(m3, xy, -np.inf).max(1)
    out[:, 5] = _masked_std(xy[:, :, 0], mask, cnt)
    out[:, 6] = _masked_std(xy[:, :, 1], mask, cnt)
    r0 = np.sqrt(xy[:, :, 0] * xy[:, :, 0] + xy[:, :, 1] * xy[:, :, 1])
    out[:, 7:17] = masked_quantiles(r0, mask, DECILES)
    cen = np.where(m3, xy, 0.0).sum(1) / cnt[:, None]
    d = xy - cen[:, None, :]
    out[:, 17:27] = masked_quantiles(np.sqrt(d[:, :, 0] * d[:, :, 0] + d[:, :, 1] * d[:, :, 1]), mask, DECILES)
    qm = np.where(mask, q, 0.0)
    out[:, 27] = qm.sum(1)
    out[:, 28] = out[:, 27] / cnt
    out[:, 29] = _masked_std(q, mask, cnt)
    out[:, 30] = np.where(mask, q, np.inf).min(1)
    out[:, 31] = np.where(mask, q, -np.inf).max(1)
    out[:, 32] = masked_quantiles(q, mask, np.array([0.5]))[:, 0]
    return out


def summary_features_batch(sps: Sequence[SubproblemData]) -> np.ndarray:
    return summary_features_padded(*pad_subproblems(sps))


def summary_features(sp: SubproblemData) -> np.ndarray:
    return summary_features_batch([sp])[0]
