"""Reference decision procedure for clausal linear real arithmetic.

Depth-first search over clause disjuncts on top of :class:`DeltaSimplex`.
At every node the simplex model is checked against all clauses; a clause
with no live disjunct is a conflict, a clause with exactly one live disjunct
is asserted (unit propagation), and otherwise the search branches on a
clause the current model violates, fewest live disjuncts first.  A disjunct
is dead when it contradicts a bound already asserted on its own row.
Once a disjunct's subtree fails, its negation holds for the remaining
siblings.  Failed subtrees are explained by the search levels their
conflicts depend on, which lets the search jump back over levels that
played no part.

Clauses over time variables only are branched on after every other violated
clause: ordering choices are cheap to settle once positions are fixed, and
deciding them first would repeat the same positional search under every
permutation.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Optional

from gmpy2 import mpq

from ..constraints import Formula, LinIneq, VarId
from .simplex import DeltaSimplex, SolverTimeout
from .types import SolveResult

# compiled literal: (simplex var, is_upper, (c, k) bound)
Literal = tuple

_NEG1, _ZERO, _POS1 = mpq(-1), mpq(0), mpq(1)


def _q(x: Fraction) -> mpq:
    return mpq(x.numerator, x.denominator)


def _fraction(x: mpq) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


class _Compiled:
    def __init__(self, formula: Formula, deadline: Optional[float]):
        self.variables = formula.sorted_variables()
        index = {v: i for i, v in enumerate(self.variables)}
        self.simplex = DeltaSimplex(len(self.variables), deadline)
        self._forms: dict[tuple, int] = {}
        self.clauses: list[tuple[Literal, ...]] = []
        # 0 for clauses touching a position variable, 1 for time-only clauses
        self.ranks: list[int] = []
        for clause in formula.clauses:
            self.clauses.append(tuple(self._literal(a, index) for a in clause.disjuncts))
            time_only = all(v.kind == "T" for a in clause.disjuncts for v, _ in a.coeffs)
            self.ranks.append(1 if time_only else 0)

    def _literal(self, atom: LinIneq, index: dict[VarId, int]) -> Literal:
        coeffs = [(index[v], _q(c)) for v, c in atom.coeffs]
        k = _q(atom.constant)
        if coeffs[0][1] > 0:
            # F < -k
            is_upper = True
            bound = (-k, _NEG1 if atom.strict else _ZERO)
        else:
            # -F + k < 0  ->  F > k
            coeffs = [(v, -c) for v, c in coeffs]
            is_upper = False
            bound = (k, _POS1 if atom.strict else _ZERO)
        if len(coeffs) == 1:
            # leading coefficient is 1 after LinIneq normalisation
            return (coeffs[0][0], is_upper, bound)
        key = tuple(coeffs)
        slack = self._forms.get(key)
        if slack is None:
            slack = self.simplex.add_row(dict(coeffs))
            self._forms[key] = slack
        return (slack, is_upper, bound)


_SAT = object()


class _Conflict:
    __slots__ = ("dep",)

    def __init__(self, dep: int):
        self.dep = dep


class _Branch:
    __slots__ = ("live", "dep", "active")

    def __init__(self, live: list, dep: int, active: list):
        self.live = live
        self.dep = dep  # why the clause's other disjuncts are dead
        self.active = active  # clauses not yet entailed at this node


def _assert(sx: DeltaSimplex, lit: Literal, dep: int) -> Optional[int]:
    v, is_upper, b = lit
    return sx.assert_upper(v, b, dep) if is_upper else sx.assert_lower(v, b, dep)


def _step(cm: _Compiled, active: list):
    """Propagate to a fixpoint, then report a conflict, SAT, or a clause to branch on.

    ``active`` holds the (literals, rank) pairs not entailed at the parent
    node; entailment only grows with depth, so nothing else needs a look.
    """
    sx = cm.simplex
    lower, upper, value = sx.lower, sx.upper, sx.value
    lower_dep, upper_dep = sx.lower_dep, sx.upper_dep
    while True:
        dep = sx.check()
        if dep is not None:
            return _Conflict(dep)
        units = []
        best_key = None
        best = None
        remaining = []
        for entry in active:
            lits, rank = entry
            live = []
            dead_dep = 0
            model_ok = False
            entailed = False
            for lit in lits:
                v, is_upper, b = lit
                if is_upper:
                    hi = upper[v]
                    if hi is not None and hi <= b:
                        entailed = True
                        break
                    lo = lower[v]
                    if lo is not None and lo > b:
                        dead_dep |= lower_dep[v]
                        continue
                    if value[v] <= b:
                        model_ok = True
                else:
                    lo = lower[v]
                    if lo is not None and lo >= b:
                        entailed = True
                        break
                    hi = upper[v]
                    if hi is not None and hi < b:
                        dead_dep |= upper_dep[v]
                        continue
                    if value[v] >= b:
                        model_ok = True
                live.append(lit)
            if entailed:
                continue
            remaining.append(entry)
            if not live:
                return _Conflict(dead_dep)
            if len(live) == 1:
                units.append((live[0], dead_dep))
            elif not model_ok and (best_key is None or (rank, len(live)) < best_key):
                best_key, best = (rank, len(live)), (live, dead_dep)
        active = remaining
        if units:
            for lit, dep in units:
                dep = _assert(sx, lit, dep)
                if dep is not None:
                    return _Conflict(dep)
            continue
        if best is None:
            return _SAT
        return _Branch(best[0], best[1], active)


def _negate(lit: Literal) -> Literal:
    v, is_upper, (c, k) = lit
    # not (v <= c + k*delta) is v >= c + (k+1)*delta, and symmetrically
    return (v, not is_upper, (c, k + 1) if is_upper else (c, k - 1))


def _search(cm: _Compiled, deadline: Optional[float]) -> bool:
    """Depth-first search with semantic branching and conflict-directed backjumping.

    Frame ``k`` of the stack owns bit ``1 << k`` and one simplex level.
    Trying the ``m``-th live disjunct of the frame's clause also asserts the
    negations of the disjuncts already refuted, each justified by the
    explanation of its failed subtree.  A failure whose explanation does not
    mention a frame's bit cannot be repaired there, so the frame is skipped.
    """
    sx = cm.simplex
    # frame: [live disjuncts, next index, accumulated explanation, failure explanations, active clauses]
    stack: list[list] = []
    state = _step(cm, list(zip(cm.clauses, cm.ranks)))
    while True:
        if state is _SAT:
            return True
        if isinstance(state, _Branch):
            stack.append([state.live, 0, state.dep, [], state.active])
        else:
            dep = state.dep
            while stack:
                bit = 1 << (len(stack) - 1)
                frame = stack[-1]
                sx.pop()
                if dep & bit:
                    dep &= ~bit
                    frame[3].append(dep)
                    frame[2] |= dep
                    if frame[1] < len(frame[0]):
                        break
                    dep = frame[2]
                stack.pop()
            if not stack:
                return False
        if deadline is not None and time.monotonic() > deadline:
            raise SolverTimeout
        frame = stack[-1]
        live, idx, _, fails, active = frame
        frame[1] += 1
        sx.push()
        dep = None
        for m in range(idx):
            dep = _assert(sx, _negate(live[m]), fails[m])
            if dep is not None:
                break
        if dep is None:
            dep = _assert(sx, live[idx], 1 << (len(stack) - 1))
        state = _step(cm, active) if dep is None else _Conflict(dep)


def _witness(cm: _Compiled) -> dict[VarId, Fraction]:
    sx = cm.simplex
    extra = []
    for lits in cm.clauses:
        for v, is_upper, b in lits:
            if (sx.value[v] <= b) if is_upper else (sx.value[v] >= b):
                extra.append((v, is_upper, b))
                break
    delta = sx.delta_bound(extra)
    return {v: _fraction(sx.value[i][0] + sx.value[i][1] * delta) for i, v in enumerate(cm.variables)}


def internal_decide(formula: Formula, deadline: Optional[float] = None) -> SolveResult:
    """Decide ``formula`` exactly; ``deadline`` is a ``time.monotonic()`` instant."""
    if formula.falsified:
        return SolveResult.unsat()
    try:
        cm = _Compiled(formula, deadline)
        if not _search(cm, deadline):
            return SolveResult.unsat(pivots=cm.simplex.pivots)
    except SolverTimeout:
        return SolveResult.timeout()
    model = _witness(cm)
    if not formula.holds(model):
        raise AssertionError("internal solver produced a non-verifying witness")
    return SolveResult.sat(model, pivots=cm.simplex.pivots)
