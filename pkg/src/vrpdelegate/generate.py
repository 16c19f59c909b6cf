"""Seeded instance generators and subsampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CVRP, CVRPTW, VARIANTS, VRPMPD, City, Depot, Instance
from .rng import stream

CVRP_CAPACITY = 50
VRPMPD_CAPACITY = 25
CLUSTER_STD = 0.07
CENTROID_LOW, CENTROID_HIGH = 0.2, 0.8
DEPOT_WINDOW = (0.0, 3.0)
SERVICE_TIME = 0.2
HALF_WIDTH = (0.1, 1.0)

DISTRIBUTIONS = ("uniform", "clustered", "mixed")


@dataclass(frozen=True)
class GenSpec:
    variant: str = CVRP
    n: int = 500
    distribution: str = "uniform"
    n_c: int = 0
    seed: int = 0

    def build(self) -> Instance:
        variant = self.variant.upper()
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if variant == CVRPTW:
            return gen_cvrptw(self.n, self.seed)
        if variant == VRPMPD:
            return gen_vrpmpd(self.n, self.seed)
        if self.distribution == "uniform":
            return gen_uniform(self.n, self.seed)
        if self.distribution == "clustered":
            return gen_clustered(self.n, self.n_c, self.seed)
        if self.distribution == "mixed":
            return gen_mixed(self.n, self.n_c, self.seed)
        raise ValueError(f"unknown distribution {self.distribution!r}")


def _demands(n: int, seed: int) -> np.ndarray:
    return stream(seed, "demands").integers(1, 10, size=n)


def _depot(seed: int) -> tuple[float, float]:
    x, y = stream(seed, "depot").random(2)
    return float(x), float(y)


def _cvrp(xy: np.ndarray, depot: tuple[float, float], demands: np.ndarray, name: str) -> Instance:
    cities = tuple(City(float(x), float(y), int(d)) for (x, y), d in zip(xy, demands))
    return Instance(CVRP, Depot(*depot), CVRP_CAPACITY, cities, name=name)


def gen_uniform(n: int, seed: int) -> Instance:
    if n < 1:
        raise ValueError("n must be >= 1")
    xy = stream(seed, "coords").random((n, 2))
    return _cvrp(xy, _depot(seed), _demands(n, seed), f"uniform-n{n}-s{seed}")


def sample_centroids(n_c: int, seed: int) -> np.ndarray:
    return stream(seed, "centroids").uniform(CENTROID_LOW, CENTROID_HIGH, size=(n_c, 2))


def sample_cluster_points(n: int, centroids: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Unclipped clustered points and the centroid each one was drawn around."""
    assign = stream(seed, "assign").integers(0, len(centroids), size=n)
    noise = stream(seed, "noise").normal(0.0, CLUSTER_STD, size=(n, 2))
    return centroids[assign] + noise, assign


def gen_clustered(n: int, n_c: int, seed: int) -> Instance:
    if n < 1 or n_c < 1:
        raise ValueError("n and n_c must be >= 1")
    raw, _ = sample_cluster_points(n, sample_centroids(n_c, seed), seed)
    xy = np.clip(raw, 0.0, 1.0)
    return _cvrp(xy, _depot(seed), _demands(n, seed), f"clustered-n{n}-c{n_c}-s{seed}")


def gen_mixed(n: int, n_c: int, seed: int) -> Instance:
    if n < 1 or n_c < 1:
        raise ValueError("n and n_c must be >= 1")
    n_uni = (n + 1) // 2
    uni = stream(seed, "coords").random((n_uni, 2))
    raw, _ = sample_cluster_points(n - n_uni, sample_centroids(n_c, seed), seed)
    xy = np.vstack([uni, np.clip(raw, 0.0, 1.0)])
    return _cvrp(xy, _depot(seed), _demands(n, seed), f"mixed-n{n}-c{n_c}-s{seed}")


def gen_cvrptw(n: int, seed: int) -> Instance:
    if n < 1:
        raise ValueError("n must be >= 1")
    e0, l0 = DEPOT_WINDOW
    s = SERVICE_TIME
    dx, dy = _depot(seed)
    xy = stream(seed, "coords").random((n, 2))
    demands = _demands(n, seed)
    windows = stream(seed, "windows")
    resample = stream(seed, "resample")
    cities = []
    for i in range(n):
        x, y = float(xy[i, 0]), float(xy[i, 1])
        while True:
            ddx, ddy = x - dx, y - dy
            t = math.sqrt(ddx * ddx + ddy * ddy)
            lo, hi = e0 + t, l0 - t - s
            if lo <= hi:
                break
            # too far from the depot for any window: move the city
            x, y = (float(v) for v in resample.random(2))
        c = windows.uniform(lo, hi)
        h = windows.uniform(*HALF_WIDTH)
        cities.append(City(x, y, int(demands[i]), 0, max(e0, c - h), min(l0, c + h), s))
    return Instance(CVRPTW, Depot(dx, dy, e0, l0), CVRP_CAPACITY, tuple(cities), name=f"cvrptw-n{n}-s{seed}")


def gen_vrpmpd(n: int, seed: int) -> Instance:
    if n < 2:
        raise ValueError("n must be >= 2")
    xy = stream(seed, "coords").random((n, 2))
    loads = _demands(n, seed)
    is_pickup = np.zeros(n, dtype=bool)
    is_pickup[stream(seed, "roles").permutation(n)[: n // 2]] = True
    cities = tuple(
        City(float(x), float(y), 0 if p else int(q), int(q) if p else 0)
        for (x, y), q, p in zip(xy, loads, is_pickup)
    )
    return Instance(VRPMPD, Depot(*_depot(seed)), VRPMPD_CAPACITY, cities, name=f"vrpmpd-n{n}-s{seed}")


def subsample(instance: Instance, n_target: int, seed: int) -> Instance:
    """Draw ``n_target`` cities without replacement as a fresh uniform-demand CVRP.

    The depot location is kept; demands are redrawn from U{1..9} and the
    capacity is reset to 50.  Time windows and pickups are dropped.
    """
    if n_target > instance.n:
        raise ValueError(f"cannot subsample {n_target} cities from {instance.n}")
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    idx = np.sort(stream(seed, "subsample").choice(instance.n, size=n_target, replace=False))
    demands = _demands(n_target, seed)
    cities = tuple(City(instance.cities[i].x, instance.cities[i].y, int(d)) for i, d in zip(idx, demands))
    depot = Depot(instance.depot.x, instance.depot.y)
    return Instance(CVRP, depot, CVRP_CAPACITY, cities, name=f"{instance.name}-sub{n_target}-s{seed}")


def subsample_indices(instance: Instance, n_target: int, seed: int) -> np.ndarray:
    """Original 0-based city positions chosen by :func:`subsample`."""
    return np.sort(stream(seed, "subsample").choice(instance.n, size=n_target, replace=False))
