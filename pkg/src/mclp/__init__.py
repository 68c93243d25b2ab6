"""Exact simplex-type solver for multi-parametric continuous linear programs."""

from .driver import IterationLimit, RestartExhausted, SolveResult, Status, choose_initial, solve
from .model import BoundaryParams, Feasibility, ParamLine, ProblemData, feasibility_check, validate

__version__ = "0.1.0"

__all__ = [
    "BoundaryParams",
    "Feasibility",
    "IterationLimit",
    "ParamLine",
    "ProblemData",
    "RestartExhausted",
    "SolveResult",
    "Status",
    "choose_initial",
    "feasibility_check",
    "solve",
    "validate",
]
