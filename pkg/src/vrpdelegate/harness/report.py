"""CSV tables and SVG curves for a set of traces.

``improvement.csv`` columns: method, axis, t, mean, se, n
    mean improvement of the method over the baseline at axis value t.
``speedup.csv`` columns: method, axis, q, geomean, se, n_defined, n_undefined
    geometric-mean speedup over the baseline at quality fraction q; runs where
    the method never reaches the baseline's threshold are counted as undefined.

Each table has one row per (grid point, method).  Output depends only on the
traces, so rerunning on the same input rewrites identical bytes.
"""

from __future__ import annotations

import csv
import math
import os
from collections import defaultdict
from typing import Sequence

import numpy as np

from ..trace import RunTrace
from .metrics import NoImprovement, geomean_se, improvement_over, mean_se, pair_traces, speedup_at

DEFAULT_QUALITIES = tuple(np.round(np.linspace(0.5, 1.0, 11), 6))
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def group_by_method(traces: Sequence[RunTrace]) -> dict[str, list[RunTrace]]:
    out = defaultdict(list)
    for t in traces:
        out[t.method].append(t)
    return {m: sorted(ts, key=lambda t: (t.instance_id, t.seed)) for m, ts in sorted(out.items())}


def axis_grid(traces: Sequence[RunTrace], axis: str, points: int = 51) -> np.ndarray:
    hi = max(getattr(t.events[-1], axis) for t in traces)
    return np.linspace(0.0, float(hi), points)


def improvement_rows(groups, baseline: str, grid, axis: str) -> list[list]:
    rows = []
    for method, traces in groups.items():
        pairs = pair_traces(traces, groups[baseline])
        for t in grid:
            m, se = mean_se([improvement_over(y, x, t, axis) for y, x in pairs])
            rows.append([method, axis, float(t), m, se, len(pairs)])
    return rows


def speedup_rows(groups, baseline: str, qualities, axis: str) -> list[list]:
    rows = []
    for method, traces in groups.items():
        pairs = pair_traces(traces, groups[baseline])
        for q in qualities:
            vals, undefined = [], 0
            for y, x in pairs:
                try:
                    s = speedup_at(y, x, float(q), axis)
                except NoImprovement:
                    s = None
                if s is None or s <= 0:
                    undefined += 1
                else:
                    vals.append(s)
            g, se = geomean_se(vals)
            rows.append([method, axis, float(q), g, se, len(vals), undefined])
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.10g}"
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def svg_curves(series: dict[str, tuple[list, list, list]], title: str, xlabel: str, ylabel: str,
               width: int = 640, height: int = 400) -> str:
    """Line plot with one polyline and error bars per series, as a plain SVG string."""
    pad = 56
    xs = [x for s in series.values() for x, y in zip(s[0], s[1]) if not math.isnan(y)]
    ys = [v for s in series.values() for y, e in zip(s[1], s[2]) if not math.isnan(y) for v in (y - e, y + e)]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" '
           f'font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="{height - 16}" text-anchor="middle">{xlabel}</text>',
           f'<text x="16" y="{height / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {height / 2:.1f})">'
           f'{ylabel}</text>']
    for frac in (0.0, 0.5, 1.0):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        out.append(f'<text x="{px(xv):.1f}" y="{height - pad + 14}" text-anchor="middle">{xv:.4g}</text>')
        out.append(f'<text x="{pad - 4}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.4g}</text>')
    for i, (name, (sx, sy, se)) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        pts = [(x, y, e) for x, y, e in zip(sx, sy, se) if not math.isnan(y)]
        if pts:
            path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y, _ in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        for x, y, e in pts:
            if e > 0:
                out.append(f'<line x1="{px(x):.2f}" y1="{py(y - e):.2f}" x2="{px(x):.2f}" y2="{py(y + e):.2f}" '
                           f'stroke="{color}" stroke-opacity="0.5"/>')
        out.append(f'<text x="{width - pad + 4}" y="{pad + 14 * i}" fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def report(traces: Sequence[RunTrace], out_dir, baseline: str | None = None, axis: str = "time",
           points: int = 51, qualities=DEFAULT_QUALITIES) -> dict[str, str]:
    """Write improvement and speedup tables and plots; returns the written paths."""
    groups = group_by_method(traces)
    if not groups:
        raise ValueError("no traces to report")
    if baseline is None:
        baseline = "random" if "random" in groups else next(iter(groups))
    if baseline not in groups:
        raise ValueError(f"baseline method {baseline!r} has no traces")
    os.makedirs(out_dir, exist_ok=True)
    grid = axis_grid(traces, axis, points)
    imp = improvement_rows(groups, baseline, grid, axis)
    spd = speedup_rows(groups, baseline, qualities, axis)
    paths = {
        "improvement_csv": os.path.join(out_dir, "improvement.csv"),
        "speedup_csv": os.path.join(out_dir, "speedup.csv"),
        "improvement_svg": os.path.join(out_dir, "improvement.svg"),
        "speedup_svg": os.path.join(out_dir, "speedup.svg"),
    }
    write_csv(paths["improvement_csv"], ["method", "axis", "t", "mean", "se", "n"], imp)
    write_csv(paths["speedup_csv"], ["method", "axis", "q", "geomean", "se", "n_defined", "n_undefined"], spd)

    def series(rows, xi, yi, ei):
        s = defaultdict(lambda: ([], [], []))
        for r in rows:
            s[r[0]][0].append(r[xi])
            s[r[0]][1].append(r[yi])
            s[r[0]][2].append(0.0 if math.isnan(r[ei]) else r[ei])
        return dict(s)

    with open(paths["improvement_svg"], "w") as fh:
        fh.write(svg_curves(series(imp, 2, 3, 4), f"improvement over {baseline}", axis, "cost reduction"))
    with open(paths["speedup_svg"], "w") as fh:
        fh.write(svg_curves(series(spd, 2, 3, 4), f"speedup over {baseline}", "quality fraction", "speedup"))
    return paths
