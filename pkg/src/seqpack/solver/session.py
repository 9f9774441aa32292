from __future__ import annotations

import os
import shlex
import subprocess
import time
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..constraints import Clause, Formula
from .internal import internal_decide
from .smtlib import emit_smtlib, parse_model
from .types import BackendFailure, ParseError, SolveResult

INTERNAL = "internal"


def parse_backend(spec: str) -> str:
    """Validate a ``--backend`` value: ``internal`` or ``external:<command>``."""
    if spec == INTERNAL:
        return spec
    if spec.startswith("external:") and spec[len("external:") :].strip():
        return spec
    raise ValueError(f"backend must be 'internal' or 'external:<command>', got {spec!r}")


@dataclass
class SolverSession:
    """One single-threaded solving context.

    ``formula`` grows monotonically between checkpoints; :meth:`pop` truncates
    it back to the clause count recorded by the matching :meth:`push`.
    ``timeout_s`` bounds each :func:`solve` call.
    """

    backend: str = INTERNAL
    formula: Formula = field(default_factory=Formula)
    timeout_s: Optional[float] = None
    smtlib_dump: Optional[str] = None
    calls: int = 0
    _checkpoints: list[tuple[int, bool, frozenset]] = field(default_factory=list)

    def __post_init__(self):
        parse_backend(self.backend)

    def assert_clauses(self, clauses: Iterable[Clause | bool]) -> int:
        return self.formula.extend(clauses)

    def push(self) -> None:
        f = self.formula
        self._checkpoints.append((len(f.clauses), f.falsified, frozenset(f.variables)))

    def pop(self) -> None:
        n, falsified, variables = self._checkpoints.pop()
        self.formula.truncate(n)
        self.formula.falsified = falsified
        self.formula.variables = set(variables)

    @property
    def depth(self) -> int:
        return len(self._checkpoints)


def _run_external(command: str, text: str, timeout: Optional[float]) -> tuple[str, str]:
    try:
        proc = subprocess.run(
            shlex.split(command),
            input=text,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired:
        return "timeout", ""
    except OSError as exc:
        raise BackendFailure(f"cannot run {command!r}: {exc}") from exc
    out = proc.stdout.strip()
    verdict, _, rest = out.partition("\n")
    verdict = verdict.strip()
    if proc.returncode != 0 and verdict not in ("sat", "unsat"):
        raise BackendFailure(f"{command!r} exited with {proc.returncode}: {proc.stderr.strip()[:200]}")
    return verdict, rest


def solve(session: SolverSession) -> SolveResult:
    formula = session.formula
    session.calls += 1
    deadline = None if session.timeout_s is None else time.monotonic() + session.timeout_s
    if session.smtlib_dump:
        os.makedirs(session.smtlib_dump, exist_ok=True)
        path = os.path.join(session.smtlib_dump, f"call_{session.calls:05d}.smt2")
        with open(path, "w") as fh:
            fh.write(emit_smtlib(formula))
    if session.backend == INTERNAL:
        return internal_decide(formula, deadline)

    command = session.backend[len("external:") :]
    verdict, rest = _run_external(command, emit_smtlib(formula), session.timeout_s)
    if verdict == "unsat":
        return SolveResult.unsat()
    if verdict in ("timeout", "unknown"):
        return SolveResult.timeout()
    if verdict != "sat":
        raise BackendFailure(f"unexpected solver verdict {verdict[:80]!r}")
    try:
        model = parse_model(rest)
    except ParseError as exc:
        raise BackendFailure(f"unparseable model: {exc}") from exc
    assignment = {v: model.get(v, Fraction(0)) for v in formula.variables}
    if not formula.holds(assignment):
        raise BackendFailure("external model does not satisfy the formula")
    return SolveResult.sat(assignment)
