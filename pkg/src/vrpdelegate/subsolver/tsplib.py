"""TSPLIB-style problem files and plain-text route files for external solvers.

Problem files follow the CVRP dialect read by LKH-3 and HGS: node 1 is the
depot and local city ``i`` is node ``i + 1``.  Coordinates are multiplied by
``COORD_SCALE`` and rounded to integers; costs are always re-evaluated on the
exact coordinates after parsing, so the rounding only steers the external
search.

Route files hold one route per line as local city indices (1..n), optionally
prefixed by ``Route #k:``, which is what HGS writes.  Blank lines and lines
starting with ``Cost`` or ``Time`` are ignored.
"""

from __future__ import annotations

import re

from ..core import CVRP, Solution
from .base import SubproblemView

COORD_SCALE = 10**6

_ROUTE_PREFIX = re.compile(r"^\s*Route\s*#?\s*\d+\s*:")


class TsplibFormatError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def write_problem_file(view: SubproblemView, path, name: str = "subproblem") -> None:
    inst = view.instance
    if inst.variant != CVRP:
        raise ValueError("external problem files are written for CVRP only")
    lines = [
        f"NAME : {name}",
        "TYPE : CVRP",
        f"DIMENSION : {inst.n + 1}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        f"CAPACITY : {inst.capacity}",
        "NODE_COORD_SECTION",
    ]
    for node, (x, y) in enumerate(inst.xy, start=1):
        lines.append(f"{node} {round(x * COORD_SCALE)} {round(y * COORD_SCALE)}")
    lines.append("DEMAND_SECTION")
    for node, q in enumerate(inst.demand, start=1):
        lines.append(f"{node} {int(q)}")
    lines += ["DEPOT_SECTION", "1", "-1", "EOF"]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_problem_coords(path) -> dict[int, tuple[float, float]]:
    """Node coordinates from a problem file, unscaled (used for round-trip checks)."""
    coords = {}
    section = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            head = line.split()[0].rstrip(":")
            if head in ("NODE_COORD_SECTION", "DEMAND_SECTION", "DEPOT_SECTION", "EOF") or ":" in line:
                section = head
                continue
            if section == "NODE_COORD_SECTION":
                parts = line.split()
                if len(parts) != 3:
                    raise TsplibFormatError(path, lineno, f"expected 'node x y', got {line!r}")
                coords[int(parts[0])] = (int(parts[1]) / COORD_SCALE, int(parts[2]) / COORD_SCALE)
    return coords


def write_solution_file(routes, path) -> None:
    with open(path, "w") as fh:
        for k, r in enumerate(routes, start=1):
            fh.write(f"Route #{k}: {' '.join(str(c) for c in r)}\n")


def parse_solution_file(view: SubproblemView, path) -> Solution:
    inst = view.instance
    routes = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = _ROUTE_PREFIX.sub("", raw).strip()
            if not line or line.startswith(("Cost", "Time")):
                continue
            try:
                cities = [int(tok) for tok in line.split()]
            except ValueError:
                raise TsplibFormatError(path, lineno, f"non-integer token in {raw.strip()!r}") from None
            cities = [c for c in cities if c != 0]
            for c in cities:
                if not 1 <= c <= inst.n:
                    raise TsplibFormatError(path, lineno, f"city {c} outside 1..{inst.n}")
            if cities:
                routes.append(cities)
    if not routes:
        raise TsplibFormatError(path, 0, "no routes found")
    return Solution.from_routes(inst, routes)
