"""Bounded simplex over rationals extended with a symbolic infinitesimal.

Values and bounds are pairs ``(c, k)`` standing for ``c + k*delta``; Python's
tuple ordering is exactly the ordering of such values for an infinitesimal
``delta > 0``, so strict bounds become ordinary bounds (``x < 3`` is
``x <= (3, -1)``).  Bound assertions are trailed so search can backtrack.

Numbers are ``gmpy2.mpq``; callers convert at the boundary.
"""

from __future__ import annotations

import time
from typing import Optional

from gmpy2 import mpq

DeltaValue = tuple  # (mpq, mpq)

ZERO = mpq(0)
ONE = mpq(1)
DZERO: DeltaValue = (ZERO, ZERO)


class SolverTimeout(Exception):
    pass


def _add(a: DeltaValue, b: DeltaValue) -> DeltaValue:
    return (a[0] + b[0], a[1] + b[1])


def _scale(a: DeltaValue, k: mpq) -> DeltaValue:
    return (a[0] * k, a[1] * k)


class DeltaSimplex:
    """Bounded simplex with backtrackable bounds.

    Every bound carries ``dep``, an int bitmask of the search levels it
    depends on; conflicts are reported as the union of the masks of the
    bounds that explain them, and ``None`` means no conflict.
    """

    def __init__(self, n_vars: int, deadline: Optional[float] = None):
        self.n = n_vars
        self.lower: list[Optional[DeltaValue]] = [None] * n_vars
        self.upper: list[Optional[DeltaValue]] = [None] * n_vars
        self.lower_dep: list[int] = [0] * n_vars
        self.upper_dep: list[int] = [0] * n_vars
        self.value: list[DeltaValue] = [DZERO] * n_vars
        self.rows: dict[int, dict[int, mpq]] = {}
        self._trail: list[tuple] = []
        self._levels: list[int] = []
        self.deadline = deadline
        self.pivots = 0

    # -- construction -----------------------------------------------------

    def add_row(self, coeffs: dict[int, mpq]) -> int:
        """Introduce a slack variable equal to ``sum(coeffs[v] * v)``."""
        s = self.n
        self.n += 1
        self.lower.append(None)
        self.upper.append(None)
        self.lower_dep.append(0)
        self.upper_dep.append(0)
        row: dict[int, mpq] = {}
        for v, c in coeffs.items():
            if v in self.rows:
                for w, d in self.rows[v].items():
                    row[w] = row.get(w, ZERO) + c * d
            else:
                row[v] = row.get(v, ZERO) + c
        row = {v: c for v, c in row.items() if c != 0}
        self.rows[s] = row
        val = DZERO
        for v, c in row.items():
            val = _add(val, _scale(self.value[v], c))
        self.value.append(val)
        return s

    # -- backtracking -----------------------------------------------------

    def push(self) -> None:
        self._levels.append(len(self._trail))

    def pop(self) -> None:
        mark = self._levels.pop()
        trail = self._trail
        while len(trail) > mark:
            v, lo, hi, ld, ud = trail.pop()
            self.lower[v] = lo
            self.upper[v] = hi
            self.lower_dep[v] = ld
            self.upper_dep[v] = ud

    # -- bounds -----------------------------------------------------------

    def assert_upper(self, v: int, bound: DeltaValue, dep: int = 0) -> Optional[int]:
        hi = self.upper[v]
        if hi is not None and hi <= bound:
            return None
        lo = self.lower[v]
        if lo is not None and bound < lo:
            return dep | self.lower_dep[v]
        self._trail.append((v, lo, hi, self.lower_dep[v], self.upper_dep[v]))
        self.upper[v] = bound
        self.upper_dep[v] = dep
        if v not in self.rows and self.value[v] > bound:
            self._update(v, bound)
        return None

    def assert_lower(self, v: int, bound: DeltaValue, dep: int = 0) -> Optional[int]:
        lo = self.lower[v]
        if lo is not None and lo >= bound:
            return None
        hi = self.upper[v]
        if hi is not None and bound > hi:
            return dep | self.upper_dep[v]
        self._trail.append((v, lo, hi, self.lower_dep[v], self.upper_dep[v]))
        self.lower[v] = bound
        self.lower_dep[v] = dep
        if v not in self.rows and self.value[v] < bound:
            self._update(v, bound)
        return None

    # -- core ---------------------------------------------------------------

    def _update(self, v: int, new: DeltaValue) -> None:
        old = self.value[v]
        theta = (new[0] - old[0], new[1] - old[1])
        value = self.value
        for b, row in self.rows.items():
            c = row.get(v)
            if c is not None:
                vb = value[b]
                value[b] = (vb[0] + c * theta[0], vb[1] + c * theta[1])
        value[v] = new

    def _pivot_and_update(self, xi: int, xj: int, target: DeltaValue) -> None:
        row_i = self.rows[xi]
        a = row_i[xj]
        vi = self.value[xi]
        theta = ((target[0] - vi[0]) / a, (target[1] - vi[1]) / a)
        value = self.value
        value[xi] = target
        vj = value[xj]
        value[xj] = (vj[0] + theta[0], vj[1] + theta[1])
        for b, row in self.rows.items():
            if b != xi:
                c = row.get(xj)
                if c is not None:
                    vb = value[b]
                    value[b] = (vb[0] + c * theta[0], vb[1] + c * theta[1])
        self._pivot(xi, xj)

    def _pivot(self, xi: int, xj: int) -> None:
        row_i = self.rows.pop(xi)
        a = row_i.pop(xj)
        inv = ONE / a
        new_row = {v: -c * inv for v, c in row_i.items()}
        new_row[xi] = inv
        for b, row in self.rows.items():
            c = row.pop(xj, None)
            if c is None:
                continue
            for v, d in new_row.items():
                s = row.get(v, ZERO) + c * d
                if s:
                    row[v] = s
                else:
                    row.pop(v, None)
        self.rows[xj] = new_row
        self.pivots += 1

    def check(self) -> Optional[int]:
        """Restore bound feasibility; returns the conflict mask if the bounds conflict.

        Bland's rule (smallest violating basic variable, smallest eligible
        nonbasic) guarantees termination.  On failure the violated row and
        the bounds pinning each of its nonbasic variables form the
        explanation.
        """
        lower, upper, value = self.lower, self.upper, self.value
        while True:
            if self.deadline is not None and self.pivots % 32 == 0 and time.monotonic() > self.deadline:
                raise SolverTimeout
            xi = None
            for b in self.rows:
                vb = value[b]
                lo, hi = lower[b], upper[b]
                if (lo is not None and vb < lo) or (hi is not None and vb > hi):
                    if xi is None or b < xi:
                        xi = b
            if xi is None:
                return None
            vi = value[xi]
            row = self.rows[xi]
            if lower[xi] is not None and vi < lower[xi]:
                target = lower[xi]
                increase = True
            else:
                target = upper[xi]
                increase = False
            for xj in sorted(row):
                a = row[xj]
                if (a > 0) == increase:
                    ok = upper[xj] is None or value[xj] < upper[xj]
                else:
                    ok = lower[xj] is None or value[xj] > lower[xj]
                if ok:
                    self._pivot_and_update(xi, xj, target)
                    break
            else:
                dep = self.lower_dep[xi] if increase else self.upper_dep[xi]
                for xj, a in row.items():
                    dep |= self.upper_dep[xj] if (a > 0) == increase else self.lower_dep[xj]
                return dep

    # -- witnesses ------------------------------------------------------------

    def delta_bound(self, extra: list[tuple[int, bool, DeltaValue]] = ()) -> mpq:
        """Largest safe concrete delta (halved) for all bounds and ``extra`` atoms."""
        limit: Optional[mpq] = None

        def consider(small: DeltaValue, big: DeltaValue):
            # need small[0] + small[1]*d <= big[0] + big[1]*d
            nonlocal limit
            dc = big[0] - small[0]
            dk = small[1] - big[1]
            if dk > 0 and dc > 0:
                cand = dc / dk
                if limit is None or cand < limit:
                    limit = cand

        for v in range(self.n):
            if self.lower[v] is not None:
                consider(self.lower[v], self.value[v])
            if self.upper[v] is not None:
                consider(self.value[v], self.upper[v])
        for v, is_upper, bound in extra:
            if is_upper:
                consider(self.value[v], bound)
            else:
                consider(bound, self.value[v])
        if limit is None:
            return ONE
        return min(ONE, limit / 2)
