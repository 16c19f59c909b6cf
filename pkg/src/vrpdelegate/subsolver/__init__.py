from .base import SubproblemView, Subsolver, SubsolverBudget, SubsolverError
from .builtin import BACKEND, BuiltinSubsolver, construct
from .external import ExternalSubsolver, SubsolverConfig, make_subsolver
from .tsplib import parse_solution_file, write_problem_file, write_solution_file

__all__ = [
    "BACKEND",
    "BuiltinSubsolver",
    "ExternalSubsolver",
    "SubproblemView",
    "Subsolver",
    "SubsolverBudget",
    "SubsolverConfig",
    "SubsolverError",
    "construct",
    "make_subsolver",
    "parse_solution_file",
    "write_problem_file",
    "write_solution_file",
]
