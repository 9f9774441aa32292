from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

from ..constraints import VarId

Assignment = Dict[VarId, Fraction]

SAT = "sat"
UNSAT = "unsat"
TIMEOUT = "timeout"


class BackendFailure(RuntimeError):
    """The external solver crashed or answered something unparseable."""


class ParseError(ValueError):
    def __init__(self, message: str, fragment: str = ""):
        super().__init__(f"{message}: {fragment!r}" if fragment else message)
        self.fragment = fragment


@dataclass
class SolveResult:
    status: str
    assignment: Optional[Assignment] = None
    stats: dict = field(default_factory=dict)

    @classmethod
    def sat(cls, assignment: Assignment, **stats) -> SolveResult:
        return cls(SAT, assignment, stats)

    @classmethod
    def unsat(cls, **stats) -> SolveResult:
        return cls(UNSAT, None, stats)

    @classmethod
    def timeout(cls, **stats) -> SolveResult:
        return cls(TIMEOUT, None, stats)

    @property
    def is_sat(self) -> bool:
        return self.status == SAT

    @property
    def is_unsat(self) -> bool:
        return self.status == UNSAT
