"""Run a method matrix described by an INI-style config file.

Example::

    [eval]
    instances = data/n500/*.json
    seeds = 0 1 2 3 4
    k = 5
    init = sweep:100
    subsolver = builtin
    budget_steps = 500
    max_steps = 200
    out_dir = runs/n500

    [methods]
    random = random
    learned = learned:models/mlp.json

Instead of ``instances`` the ``[eval]`` section may describe generated ones
with ``variant``, ``distribution``, ``n``, ``n_c``, ``count`` and
``instance_seed``.  Every (instance, seed) pair is initialized once and shared
by all methods, so their traces start from the same cost.
"""

from __future__ import annotations

import configparser
import glob
import logging
import os
from dataclasses import dataclass, field

from ..core import Instance, Solution, load_instance, load_solution
from ..delegation import run
from ..generate import GenSpec
from ..initializer import initialize, random_chain
from ..rng import derive_seed
from ..selectors import make_selector
from ..subsolver import SubsolverBudget, make_subsolver
from ..trace import RunTrace

log = logging.getLogger(__name__)


@dataclass
class EvalConfig:
    instances: list[Instance]
    methods: dict[str, str]
    seeds: list[int] = field(default_factory=lambda: [0])
    k: int = 5
    init: str = "sweep:100"
    subsolver: str = "builtin"
    budget: SubsolverBudget = field(default_factory=SubsolverBudget)
    max_steps: int | None = None
    wall_budget: float | None = None
    out_dir: str | None = None


def _opt_float(sec, key):
    v = sec.get(key, "").strip()
    return float(v) if v else None


def _opt_int(sec, key):
    v = sec.get(key, "").strip()
    return int(v) if v else None


def load_eval_config(path) -> EvalConfig:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if not cp.read(path):
        raise FileNotFoundError(path)
    sec = cp["eval"]
    base = os.path.dirname(os.path.abspath(path))
    if "instances" in sec:
        pattern = sec["instances"]
        if not os.path.isabs(pattern):
            pattern = os.path.join(base, pattern)
        files = sorted(glob.glob(pattern))
        if not files:
            raise FileNotFoundError(f"no instances match {pattern}")
        instances = [load_instance(f) for f in files]
    else:
        seed0 = sec.getint("instance_seed", 0)
        instances = [GenSpec(sec.get("variant", "cvrp"), sec.getint("n"), sec.get("distribution", "uniform"),
                             sec.getint("n_c", 0), seed0 + i).build() for i in range(sec.getint("count", 1))]
    methods = dict(cp["methods"]) if cp.has_section("methods") else {"random": "random"}
    for name, spec in methods.items():
        if spec.startswith("learned:") and not os.path.isabs(spec[8:]):
            methods[name] = "learned:" + os.path.join(base, spec[8:])
    out_dir = sec.get("out_dir")
    if out_dir and not os.path.isabs(out_dir):
        out_dir = os.path.join(base, out_dir)
    return EvalConfig(
        instances=instances,
        methods=methods,
        seeds=[int(s) for s in sec.get("seeds", "0").replace(",", " ").split()],
        k=sec.getint("k", 5),
        init=sec.get("init", "sweep:100"),
        subsolver=sec.get("subsolver", "builtin"),
        budget=SubsolverBudget(_opt_int(sec, "budget_steps") if "budget_steps" in sec else 500,
                               _opt_float(sec, "budget_wall")),
        max_steps=_opt_int(sec, "max_steps"),
        wall_budget=_opt_float(sec, "wall_budget"),
        out_dir=out_dir,
    )


def initial_solution(instance: Instance, spec: str, subsolver, seed: int) -> Solution:
    """``sweep:L`` (sweep init with budget L), ``chain`` (random chain) or a solution file."""
    if spec == "chain":
        return random_chain(instance, seed)
    if spec.startswith("sweep"):
        _, _, L = spec.partition(":")
        return initialize(instance, subsolver, L=int(L or 100), seed=seed)
    return load_solution(instance, spec)


def evaluate(cfg: EvalConfig) -> list[RunTrace]:
    subsolver = make_subsolver(cfg.subsolver)
    traces = []
    for inst in cfg.instances:
        for seed in cfg.seeds:
            x0 = initial_solution(inst, cfg.init, subsolver, derive_seed(seed, "init", inst.name))
            for name, spec in cfg.methods.items():
                selector = make_selector(spec, derive_seed(seed, "selector", name))
                _, trace = run(inst, x0, selector, subsolver, k=cfg.k, max_steps=cfg.max_steps,
                               wall_budget=cfg.wall_budget, budget=cfg.budget, seed=seed, method=name)
                log.info("%s seed %d %s: %.4f -> %.4f (%d calls)", inst.name, seed, name, trace.init_cost,
                         trace.final_cost, trace.events[-1].calls)
                traces.append(trace)
                if cfg.out_dir:
                    os.makedirs(os.path.join(cfg.out_dir, name), exist_ok=True)
                    trace.save(os.path.join(cfg.out_dir, name, f"{inst.name}__s{seed}.jsonl"))
    return traces


def load_traces(paths) -> list[RunTrace]:
    files = []
    for p in paths:
        if os.path.isdir(p):
            files += sorted(glob.glob(os.path.join(p, "**", "*.jsonl"), recursive=True))
        else:
            files.append(p)
    return [RunTrace.load(f) for f in files]
