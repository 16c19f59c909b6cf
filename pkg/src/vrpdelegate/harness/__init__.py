from .evaluate import EvalConfig, evaluate, initial_solution, load_eval_config, load_traces
from .metrics import (
    NoImprovement,
    cost_at,
    first_crossing,
    geomean_se,
    improvement_over,
    mean_se,
    quality_at_fraction,
    speedup_at,
)
from .report import report

__all__ = [
    "EvalConfig",
    "NoImprovement",
    "cost_at",
    "evaluate",
    "first_crossing",
    "geomean_se",
    "improvement_over",
    "initial_solution",
    "load_eval_config",
    "load_traces",
    "mean_se",
    "quality_at_fraction",
    "report",
    "speedup_at",
]
