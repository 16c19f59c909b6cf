"""Adapter that runs an external solver executable on a subproblem."""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field

from ..core import Solution, validate_solution
from .base import SubproblemView, SubsolverBudget, SubsolverError
from .builtin import BuiltinSubsolver
from .tsplib import TsplibFormatError, parse_solution_file, write_problem_file


@dataclass
class SubsolverConfig:
    """``command`` is a template with ``{in}`` and ``{out}`` placeholders.

    ``{steps}``, ``{seed}`` and ``{time}`` are also substituted when present.
    """

    kind: str = "builtin"
    command: str = ""
    workdir: str | None = None
    timeout: float | None = 600.0
    max_processes: int = 1
    env: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("builtin", "external"):
            raise ValueError(f"unknown subsolver kind {self.kind!r}")
        if self.kind == "external" and ("{in}" not in self.command or "{out}" not in self.command):
            raise ValueError("external command template needs {in} and {out} placeholders")


class ExternalSubsolver:
    name = "external"

    def __init__(self, config: SubsolverConfig):
        if config.kind != "external":
            raise ValueError("ExternalSubsolver needs an external config")
        self.config = config
        self._slots = threading.BoundedSemaphore(max(1, config.max_processes))
        self.calls = 0

    def _command(self, path_in: str, path_out: str, budget: SubsolverBudget, seed: int) -> list[str]:
        values = {
            "in": path_in,
            "out": path_out,
            "steps": "" if budget.max_steps is None else str(budget.max_steps),
            "time": "" if budget.max_wall is None else str(budget.max_wall),
            "seed": str(seed),
        }
        return [tok.format(**values) for tok in shlex.split(self.config.command)]

    def solve(self, view: SubproblemView, budget: SubsolverBudget, seed: int) -> Solution:
        self.calls += 1
        cfg = self.config
        timeout = cfg.timeout
        env = dict(os.environ, **cfg.env)
        with self._slots, tempfile.TemporaryDirectory(dir=cfg.workdir) as tmp:
            path_in = os.path.join(tmp, "problem.vrp")
            path_out = os.path.join(tmp, "solution.sol")
            write_problem_file(view, path_in)
            cmd = self._command(path_in, path_out, budget, seed)
            try:
                proc = subprocess.run(cmd, cwd=cfg.workdir or tmp, env=env, capture_output=True,
                                      text=True, timeout=timeout)
            except subprocess.TimeoutExpired as exc:
                raise SubsolverError(f"external solver timed out after {timeout}s") from exc
            except OSError as exc:
                raise SubsolverError(f"cannot run external solver: {exc}") from exc
            if proc.returncode != 0:
                raise SubsolverError(
                    f"external solver exited with {proc.returncode}: {proc.stderr.strip()[-500:]}")
            if not os.path.exists(path_out):
                raise SubsolverError("external solver wrote no solution file")
            try:
                sol = parse_solution_file(view, path_out)
            except TsplibFormatError as exc:
                raise SubsolverError(str(exc)) from exc
        bad = validate_solution(view.instance, sol)
        if bad is not None:
            raise SubsolverError(f"external solution is infeasible: {bad}")
        return sol


def make_subsolver(spec: str | SubsolverConfig, backend: str | None = None):
    """Build a subsolver from ``'builtin'``, ``'external:<template>'`` or a config."""
    if isinstance(spec, SubsolverConfig):
        return BuiltinSubsolver(backend) if spec.kind == "builtin" else ExternalSubsolver(spec)
    if spec == "builtin":
        return BuiltinSubsolver(backend)
    if spec.startswith("external:"):
        return ExternalSubsolver(SubsolverConfig("external", spec[len("external:"):]))
    raise ValueError(f"unknown subsolver {spec!r}")
