"""Oracle label generation.

Each instance is improved for ``D_train`` steps by always taking the best
candidate after solving all of them.  Every newly solved city set becomes one
training example (its subsolution cost is the target); the per-step candidate
lists are kept as well, so a selector can later be scored against the oracle.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core import Instance, Solution
from ..delegation import SelectionExhausted, SelectionState, construct_subproblems, delegate_step
from ..selectors import OracleSelector
from ..subsolver.base import SubsolverBudget
from .features import SubproblemData, subproblem_features

log = logging.getLogger(__name__)


@dataclass
class TrainingExample:
    sp: SubproblemData
    target: float
    instance_id: str = ""
    step: int = 0
    n: int = 0
    k: int = 0
    signature: str = ""
    current_cost: float = 0.0

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id, "step": self.step, "n": self.n, "k": self.k,
            "signature": self.signature, "current_cost": self.current_cost, "target": self.target,
            "capacity": self.sp.capacity, "rel_xy": self.sp.rel_xy.tolist(), "load": self.sp.load.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingExample":
        sp = SubproblemData(np.asarray(d["rel_xy"], dtype=np.float64).reshape(-1, 2),
                            np.asarray(d["load"], dtype=np.float64), float(d["capacity"]))
        return cls(sp, float(d["target"]), d["instance_id"], int(d["step"]), int(d["n"]), int(d["k"]),
                   d["signature"], float(d["current_cost"]))


@dataclass
class LabeledStep:
    """All open candidates of one oracle step: (signature, current cost, label)."""

    instance_id: str
    step: int
    n_routes: int
    candidates: list[tuple[str, float, float]]

    def best_delta(self) -> float:
        return max(c - y for _, c, y in self.candidates)


@dataclass
class Dataset:
    examples: list[TrainingExample] = field(default_factory=list)
    steps: list[LabeledStep] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def extend(self, other: "Dataset") -> None:
        self.examples += other.examples
        self.steps += other.steps
        self.errors += other.errors

    def by_signature(self) -> dict[tuple[str, str], TrainingExample]:
        return {(e.instance_id, e.signature): e for e in self.examples}

    def save(self, path) -> None:
        with open(path, "w") as fh:
            for e in self.examples:
                fh.write(json.dumps(e.to_dict()) + "\n")
        with open(f"{path}.steps.jsonl", "w") as fh:
            for s in self.steps:
                fh.write(json.dumps({"instance_id": s.instance_id, "step": s.step, "n_routes": s.n_routes,
                                     "candidates": s.candidates}) + "\n")

    @classmethod
    def load(cls, path) -> "Dataset":
        ds = cls()
        with open(path) as fh:
            ds.examples = [TrainingExample.from_dict(json.loads(line)) for line in fh if line.strip()]
        try:
            with open(f"{path}.steps.jsonl") as fh:
                for line in fh:
                    if line.strip():
                        d = json.loads(line)
                        ds.steps.append(LabeledStep(d["instance_id"], d["step"], d["n_routes"],
                                                    [tuple(c) for c in d["candidates"]]))
        except FileNotFoundError:
            pass
        return ds


def label_instance(instance: Instance, initial: Solution, k: int, subsolver, budget: SubsolverBudget,
                   d_train: int, seed: int) -> Dataset:
    ds = Dataset()
    state = SelectionState(instance.n)
    oracle = OracleSelector()
    emitted = set()
    sol = initial
    for step in range(1, d_train + 1):
        cands = construct_subproblems(instance, sol, k)
        try:
            new, _ = delegate_step(instance, sol, state, oracle, subsolver, k, budget, seed,
                                   step=step, candidates=cands)
        except SelectionExhausted:
            break
        ds.steps.append(LabeledStep(instance.name, step, len(sol.routes),
                                    [(c.signature, c.current_cost, y) for c, y in oracle.last_labels]))
        ds.errors += [f"{instance.name} step {step}: {msg}" for _, msg in oracle.last_errors]
        for c, y in oracle.last_labels:
            if c.signature in emitted:
                continue
            emitted.add(c.signature)
            ds.examples.append(TrainingExample(subproblem_features(instance, c.cities), y, instance.name, step,
                                               instance.n, k, c.signature, c.current_cost))
        sol = new
    return ds


def _label_job(args):
    instance, initial, k, subsolver, budget, d_train, seed = args
    try:
        return label_instance(instance, initial, k, subsolver, budget, d_train, seed)
    except Exception as exc:  # a fatal error skips only this instance
        return Dataset(errors=[f"{instance.name}: fatal {type(exc).__name__}: {exc}"])


def generate_labels(items: list[tuple[Instance, Solution]], k: int, subsolver, budget: SubsolverBudget,
                    d_train: int = 30, seed: int = 0, workers: int = 1) -> Dataset:
    """Label every ``(instance, initial solution)`` pair; results are merged in input order."""
    jobs = [(inst, x0, k, subsolver, budget, d_train, seed) for inst, x0 in items]
    out = Dataset()
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_label_job, jobs))
    else:
        parts = [_label_job(j) for j in jobs]
    for part in parts:
        out.extend(part)
    for msg in out.errors:
        log.warning(msg)
    return out
