from .internal import internal_decide
from .session import INTERNAL, SolverSession, parse_backend, solve
from .smtlib import emit_smtlib, parse_model
from .types import (
    SAT,
    TIMEOUT,
    UNSAT,
    Assignment,
    BackendFailure,
    ParseError,
    SolveResult,
)

__all__ = [
    "INTERNAL",
    "SAT",
    "TIMEOUT",
    "UNSAT",
    "Assignment",
    "BackendFailure",
    "ParseError",
    "SolveResult",
    "SolverSession",
    "emit_smtlib",
    "internal_decide",
    "parse_backend",
    "parse_model",
    "solve",
]
