from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from ..core import Instance, Solution


@dataclass(frozen=True, eq=False)
class SubproblemView:
    """The depot, capacity and a subset of a parent instance's cities.

    ``instance`` renumbers the member cities 1..n; ``origin[i]`` is the parent
    index of local city ``i`` (``origin[0] == 0`` is the depot).
    """

    instance: Instance
    origin: tuple[int, ...]

    @classmethod
    def from_parent(cls, parent: Instance, cities: Sequence[int]) -> "SubproblemView":
        cities = [int(c) for c in cities]
        if not cities:
            raise ValueError("subproblem needs at least one city")
        if len(set(cities)) != len(cities):
            raise ValueError("subproblem cities must be distinct")
        for c in cities:
            if not 1 <= c <= parent.n:
                raise IndexError(f"city {c} not in parent instance")
        sub = Instance(parent.variant, parent.depot, parent.capacity,
                       tuple(parent.cities[c - 1] for c in cities), name=parent.name)
        return cls(sub, (0, *cities))

    @property
    def n(self) -> int:
        return self.instance.n

    def to_parent(self, routes: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
        o = self.origin
        return [tuple(o[c] for c in r) for r in routes]


@dataclass(frozen=True)
class SubsolverBudget:
    max_steps: int | None = 500
    max_wall: float | None = None

    def __post_init__(self):
        finite = (self.max_steps is not None) or (self.max_wall is not None and math.isfinite(self.max_wall))
        if not finite:
            raise ValueError("budget needs a finite step or wall-time bound")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")


class SubsolverError(RuntimeError):
    """A subsolver run failed (process error, timeout or unreadable output)."""


class Subsolver(Protocol):
    name: str

    def solve(self, view: SubproblemView, budget: SubsolverBudget, seed: int) -> Solution:
        """Solve ``view`` from scratch and return a solution on its local indices."""
        ...
