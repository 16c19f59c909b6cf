"""Iterative subproblem delegation for large vehicle routing problems."""

from .core import (
    COST_EPS,
    CVRP,
    CVRPTW,
    VARIANTS,
    VRPMPD,
    City,
    Depot,
    Instance,
    Solution,
    Violation,
    load_instance,
    load_solution,
    route_cost,
    save_instance,
    save_solution,
    solution_cost,
    validate_solution,
)
from .delegation import SelectionExhausted, SelectionState, construct_subproblems, delegate_step, run
from .generate import GenSpec
from .initializer import initialize
from .selectors import CountSelector, LearnedSelector, MaxMinSelector, OracleSelector, RandomSelector, make_selector
from .subsolver import BuiltinSubsolver, SubsolverBudget, make_subsolver
from .trace import RunTrace, StepRecord

__version__ = "0.1.0"

__all__ = [
    "COST_EPS",
    "CVRP",
    "CVRPTW",
    "VARIANTS",
    "VRPMPD",
    "BuiltinSubsolver",
    "City",
    "CountSelector",
    "Depot",
    "GenSpec",
    "Instance",
    "LearnedSelector",
    "MaxMinSelector",
    "OracleSelector",
    "RandomSelector",
    "RunTrace",
    "SelectionExhausted",
    "SelectionState",
    "Solution",
    "StepRecord",
    "SubsolverBudget",
    "Violation",
    "construct_subproblems",
    "delegate_step",
    "initialize",
    "load_instance",
    "load_solution",
    "make_selector",
    "make_subsolver",
    "route_cost",
    "run",
    "save_instance",
    "save_solution",
    "solution_cost",
    "validate_solution",
]
