"""Subproblem selection policies.

Every selector sees the full candidate list, skips masked candidates and
raises :class:`SelectionExhausted` when none are left.  Ties always go to the
candidate with the lowest center-route id, which is the candidate order.
"""

from __future__ import annotations

import numpy as np

from .delegation import SelectionExhausted, SelectionState, SubproblemRef
from .rng import stream
from .subsolver.base import SubsolverError


def _open(candidates, state: SelectionState) -> list[SubproblemRef]:
    live = state.unmasked(candidates)
    if not live:
        raise SelectionExhausted()
    return live


class RandomSelector:
    name = "random"

    def __init__(self, seed: int = 0):
        self.rng = stream(seed, "selector")

    def select(self, candidates, state, ctx=None) -> SubproblemRef:
        live = _open(candidates, state)
        return live[int(self.rng.integers(len(live)))]


class CountSelector:
    """Least cumulatively selected center route (sum of its cities' counts)."""

    name = "count"

    def select(self, candidates, state, ctx=None) -> SubproblemRef:
        live = _open(candidates, state)
        scores = [int(state.counts[list(c.center_cities)].sum()) for c in live]
        return live[int(np.argmin(scores))]


class MaxMinSelector:
    """Center centroid farthest from every previously selected centroid."""

    name = "maxmin"

    def select(self, candidates, state, ctx=None) -> SubproblemRef:
        live = _open(candidates, state)
        if not state.history:
            return live[0]
        hist = np.asarray(state.history)
        cents = np.asarray([c.center_centroid for c in live])
        dx = cents[:, None, 0] - hist[None, :, 0]
        dy = cents[:, None, 1] - hist[None, :, 1]
        nearest = np.sqrt(dx * dx + dy * dy).min(axis=1)
        return live[int(np.argmax(nearest))]


class LearnedSelector:
    """argmax of current cost minus predicted subsolution cost.

    Predictions are cached by signature in the selection state, so after the
    first step only subproblems touched by the last accepted move are scored.
    """

    name = "learned"

    def __init__(self, model):
        self.model = model
        self.hits = 0
        self.misses = 0

    def scores(self, candidates, state, ctx) -> np.ndarray:
        missing = [c for c in candidates if c.signature not in state.pred_cache]
        self.hits += len(candidates) - len(missing)
        self.misses += len(missing)
        if missing:
            from .learning.features import subproblem_features

            feats = [subproblem_features(ctx.instance, c.cities) for c in missing]
            preds = self.model.predict(feats)
            for c, p in zip(missing, preds):
                state.pred_cache[c.signature] = (float(p), c.city_set)
        return np.array([c.current_cost - state.pred_cache[c.signature][0] for c in candidates])

    def select(self, candidates, state, ctx) -> SubproblemRef:
        live = _open(candidates, state)
        return live[int(np.argmax(self.scores(live, state, ctx)))]


class OracleSelector:
    """Solve every open candidate and pick the best immediate improvement.

    ``last_labels`` keeps ``(candidate, subsolution cost)`` for the most recent
    call; candidates whose solve failed are masked and left out.
    """

    name = "oracle"

    def __init__(self):
        self.last_labels: list[tuple[SubproblemRef, float]] = []
        self.last_errors: list[tuple[SubproblemRef, str]] = []

    def select(self, candidates, state, ctx) -> SubproblemRef:
        live = _open(candidates, state)
        labels, errors = [], []
        for c in live:
            try:
                sub = state.subsolve(ctx.instance, c, ctx.subsolver, ctx.budget, ctx.seed)
            except SubsolverError as exc:
                errors.append((c, str(exc)))
                state.mask[c.signature] = c.city_set
                continue
            labels.append((c, sub.cost))
        self.last_labels, self.last_errors = labels, errors
        if not labels:
            raise SelectionExhausted()
        deltas = [c.current_cost - cost for c, cost in labels]
        return labels[int(np.argmax(deltas))][0]


def make_selector(spec: str, seed: int = 0):
    """Build a selector from ``random``, ``count``, ``maxmin``, ``oracle`` or ``learned:<model>``."""
    if spec == "random":
        return RandomSelector(seed)
    if spec == "count":
        return CountSelector()
    if spec == "maxmin":
        return MaxMinSelector()
    if spec == "oracle":
        return OracleSelector()
    if spec.startswith("learned:"):
        from .learning.models import load_model

        return LearnedSelector(load_model(spec[len("learned:"):]))
    raise ValueError(f"unknown selector {spec!r}")
