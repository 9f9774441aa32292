"""Compile packing and scheduling requirements into clausal linear real arithmetic.

A :class:`Formula` is a conjunction of :class:`Clause` objects, each a
disjunction of :class:`LinIneq` atoms ``sum(c_v * v) + constant  (< | <=)  0``
over position variables ``X_i, Y_i`` and time variables ``T_i``.

Object positions are given either as an integer (the object's index, so its
position is the variable pair ``X_i, Y_i``) or as a fixed ``Point2`` for
objects already placed on the plate, in which case they enter as constants.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .geometry import ConvexPolygon, ExtruderProfile, Point2, PrintObject, as_rational, envelope_hull

ZERO = Fraction(0)
ONE = Fraction(1)


class VarId(NamedTuple):
    kind: str  # "X", "Y" or "T"
    object_index: int

    @property
    def name(self) -> str:
        return f"{self.kind}_{self.object_index}"

    def sort_key(self):
        return (self.object_index, "XYT".index(self.kind))


def X(i: int) -> VarId:
    return VarId("X", i)


def Y(i: int) -> VarId:
    return VarId("Y", i)


def T(i: int) -> VarId:
    return VarId("T", i)


class Affine:
    """Mutable affine expression used while building atoms."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[VarId, Fraction] | None = None, const=ZERO):
        self.terms = dict(terms or {})
        self.const = as_rational(const)

    def add(self, other: Affine, scale: Fraction = ONE) -> Affine:
        out = Affine(self.terms, self.const + scale * other.const)
        for v, c in other.terms.items():
            out.terms[v] = out.terms.get(v, ZERO) + scale * c
        return out

    def __add__(self, other: Affine) -> Affine:
        return self.add(other)

    def __sub__(self, other: Affine) -> Affine:
        return self.add(other, -ONE)

    def __mul__(self, k) -> Affine:
        k = as_rational(k)
        return Affine({v: c * k for v, c in self.terms.items()}, self.const * k)

    __rmul__ = __mul__

    def __neg__(self) -> Affine:
        return self * -1

    def lt0(self) -> LinIneq | bool:
        return LinIneq.make(self.terms, self.const, strict=True)

    def le0(self) -> LinIneq | bool:
        return LinIneq.make(self.terms, self.const, strict=False)


def var(v: VarId) -> Affine:
    return Affine({v: ONE})


def const(c) -> Affine:
    return Affine(None, c)


@dataclass(frozen=True)
class LinIneq:
    """``sum(coeffs) + constant < 0`` when ``strict`` else ``<= 0``.

    Build through :meth:`make`, which scales the leading coefficient to +-1 so
    equal half-spaces compare equal, and folds variable-free atoms to bools.
    """

    coeffs: tuple[tuple[VarId, Fraction], ...]
    constant: Fraction
    strict: bool

    @classmethod
    def make(cls, coeffs: Mapping[VarId, Fraction], constant, strict: bool) -> LinIneq | bool:
        items = sorted(
            ((v, as_rational(c)) for v, c in coeffs.items() if c != 0),
            key=lambda vc: vc[0].sort_key(),
        )
        constant = as_rational(constant)
        if not items:
            return constant < 0 if strict else constant <= 0
        scale = abs(items[0][1])
        if scale != 1:
            items = [(v, c / scale) for v, c in items]
            constant /= scale
        return cls(tuple(items), constant, strict)

    @property
    def relation(self) -> str:
        return "<" if self.strict else "<="

    @property
    def coeff_map(self) -> dict[VarId, Fraction]:
        return dict(self.coeffs)

    @property
    def variables(self) -> tuple[VarId, ...]:
        return tuple(v for v, _ in self.coeffs)

    def lhs(self, assignment: Mapping[VarId, Fraction]) -> Fraction:
        return sum((c * assignment[v] for v, c in self.coeffs), self.constant)

    def holds(self, assignment: Mapping[VarId, Fraction]) -> bool:
        value = self.lhs(assignment)
        return value < 0 if self.strict else value <= 0

    def __str__(self) -> str:
        parts = []
        for v, c in self.coeffs:
            if c == 1:
                parts.append(f"+ {v.name}")
            elif c == -1:
                parts.append(f"- {v.name}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {abs(c)}*{v.name}")
        if self.constant:
            parts.append(f"{'+' if self.constant > 0 else '-'} {abs(self.constant)}")
        text = " ".join(parts).lstrip("+ ")
        return f"{text} {self.relation} 0"


def _stronger(a: LinIneq, b: LinIneq) -> LinIneq:
    # same coefficients: a larger constant is the tighter half-plane
    if a.constant != b.constant:
        return a if a.constant > b.constant else b
    return a if a.strict else b


def _weaker(a: LinIneq, b: LinIneq) -> LinIneq:
    return b if _stronger(a, b) is a else a


@dataclass(frozen=True)
class Clause:
    disjuncts: tuple[LinIneq, ...]

    def __post_init__(self):
        if not self.disjuncts:
            raise ValueError("empty clause")

    @classmethod
    def of(cls, atoms: Iterable[LinIneq | bool]) -> Clause | bool:
        """Build a clause, simplifying constants and parallel atoms.

        Returns True when the disjunction is valid, False when no disjunct
        can hold.  Atoms sharing a coefficient vector keep only the weakest.
        """
        by_coeffs: dict[tuple, LinIneq] = {}
        for atom in atoms:
            if atom is True:
                return True
            if atom is False:
                continue
            prev = by_coeffs.get(atom.coeffs)
            by_coeffs[atom.coeffs] = atom if prev is None else _weaker(prev, atom)
        if not by_coeffs:
            return False
        return cls(tuple(by_coeffs.values()))

    def holds(self, assignment: Mapping[VarId, Fraction]) -> bool:
        return any(a.holds(assignment) for a in self.disjuncts)

    def __str__(self) -> str:
        return " | ".join(str(a) for a in self.disjuncts)


@dataclass
class Formula:
    clauses: list[Clause] = field(default_factory=list)
    variables: set[VarId] = field(default_factory=set)
    # Set when an added clause simplified to False.
    falsified: bool = False
    _seen: set[Clause] = field(default_factory=set, repr=False)

    def add(self, clause: Clause | bool) -> bool:
        """Add a clause; returns True if the formula changed."""
        if clause is True:
            return False
        if clause is False:
            changed = not self.falsified
            self.falsified = True
            return changed
        if clause in self._seen:
            return False
        self._seen.add(clause)
        self.clauses.append(clause)
        for atom in clause.disjuncts:
            self.variables.update(atom.variables)
        return True

    def extend(self, clauses: Iterable[Clause | bool]) -> int:
        return sum(self.add(c) for c in clauses)

    def declare(self, *variables: VarId) -> None:
        self.variables.update(variables)

    def copy(self) -> Formula:
        return Formula(list(self.clauses), set(self.variables), self.falsified, set(self._seen))

    def truncate(self, n_clauses: int) -> None:
        for c in self.clauses[n_clauses:]:
            self._seen.discard(c)
        del self.clauses[n_clauses:]

    def holds(self, assignment: Mapping[VarId, Fraction]) -> bool:
        return not self.falsified and all(c.holds(assignment) for c in self.clauses)

    def sorted_variables(self) -> list[VarId]:
        return sorted(self.variables, key=VarId.sort_key)

    def __len__(self) -> int:
        return len(self.clauses)


Position = Union[int, Point2]


def _offset(pos: Position) -> tuple[Affine, Affine]:
    if isinstance(pos, Point2):
        return const(pos.x), const(pos.y)
    return var(X(pos)), var(Y(pos))


def _side(e1: Point2, e2: Point2, pos_e: Position, p: Point2, pos_p: Position) -> Affine:
    """cross(e2 - e1, (p + pos_p) - (e1 + pos_e)); positive when left of the edge."""
    ex, ey = e2.x - e1.x, e2.y - e1.y
    px, py = _offset(pos_p)
    qx, qy = _offset(pos_e)
    rel_x = px - qx + const(p.x - e1.x)
    rel_y = py - qy + const(p.y - e1.y)
    return rel_y * ex - rel_x * ey


def pop_constraint(
    pos_a: Position, poly_a: ConvexPolygon, pos_b: Position, poly_b: ConvexPolygon
) -> list[Clause | bool]:
    """Every vertex of placed ``poly_a`` lies outside or on placed ``poly_b``."""
    if pos_a == pos_b and not isinstance(pos_a, Point2):
        raise ValueError("PoP between an object and itself")
    edges = poly_b.edges()
    return [
        Clause.of(_side(e1, e2, pos_b, a, pos_a).le0() for e1, e2 in edges)
        for a in poly_a.vertices
    ]


def lni_constraint(
    pos_a: Position, a1: Point2, a2: Point2, pos_b: Position, b1: Point2, b2: Point2
) -> list[Clause | bool]:
    """Placed edges a1-a2 and b1-b2 do not touch.

    Non-intersection is witnessed by one edge having both endpoints strictly on
    one side of the other edge's line, or, for collinear edges, by b1-b2
    lying strictly beyond either end of a1-a2 along its direction.  The
    disjunction of these 2-atom conjunctions is distributed into clauses; the
    two atoms of each conjunction share a coefficient vector, so the product
    collapses to a single clause.
    """
    conjunctions: list[list[LinIneq | bool]] = []
    for (s1, s2, pos_s), (p, q, pos_p) in (
        ((a1, a2, pos_a), (b1, b2, pos_b)),
        ((b1, b2, pos_b), (a1, a2, pos_a)),
    ):
        left_p, left_q = _side(s1, s2, pos_s, p, pos_p), _side(s1, s2, pos_s, q, pos_p)
        conjunctions.append([(-left_p).lt0(), (-left_q).lt0()])  # both strictly left
        conjunctions.append([left_p.lt0(), left_q.lt0()])  # both strictly right
    # Along a1 -> a2: both b endpoints past a2, or both before a1.
    normal_start = Point2(a1.x - (a2.y - a1.y), a1.y + (a2.x - a1.x))
    normal_end = Point2(a2.x - (a2.y - a1.y), a2.y + (a2.x - a1.x))
    past_end_b1 = _side(a2, normal_end, pos_a, b1, pos_b)
    past_end_b2 = _side(a2, normal_end, pos_a, b2, pos_b)
    conjunctions.append([past_end_b1.lt0(), past_end_b2.lt0()])
    before_b1 = _side(a1, normal_start, pos_a, b1, pos_b)
    before_b2 = _side(a1, normal_start, pos_a, b2, pos_b)
    conjunctions.append([(-before_b1).lt0(), (-before_b2).lt0()])
    simplified: list[list[LinIneq]] = []
    for conj in conjunctions:
        if any(a is False for a in conj):
            continue
        atoms: dict[tuple, LinIneq] = {}
        for a in conj:
            if a is True:
                continue
            prev = atoms.get(a.coeffs)
            atoms[a.coeffs] = a if prev is None else _stronger(prev, a)
        if not atoms:
            return []  # one conjunction is constant-true: nothing to assert
        simplified.append(list(atoms.values()))
    if not simplified:
        return [False]
    out: list[Clause | bool] = []
    seen = set()
    for combo in itertools.product(*simplified):
        c = Clause.of(combo)
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def pip_constraint(pos: Position, poly: ConvexPolygon, container: ConvexPolygon) -> list[Clause | bool]:
    """Every vertex of placed ``poly`` lies inside or on ``container`` (at the origin)."""
    origin = Point2(ZERO, ZERO)
    return [
        Clause.of([(-_side(e1, e2, origin, v, pos)).le0()])
        for v in poly.vertices
        for e1, e2 in container.edges()
    ]


def time_separation(i: int, j: int, eps_t) -> Clause:
    if i == j:
        raise ValueError("time separation needs two objects")
    eps_t = as_rational(eps_t)
    ti, tj = var(T(i)), var(T(j))
    return Clause.of([(ti - tj + const(eps_t)).lt0(), (tj - ti + const(eps_t)).lt0()])


def order_escape(i: int, j: int, eps_t) -> LinIneq:
    """``T_j + eps_t < T_i``: the negation of "i before j" under separation."""
    return (var(T(j)) - var(T(i)) + const(as_rational(eps_t))).lt0()


def guard_with_order(i: int, j: int, eps_t, body: Iterable[Clause | bool]) -> list[Clause | bool]:
    """Encode ``T_i < T_j  =>  body`` by adding the escape disjunct.

    The escape goes last so that search tries the geometric disjuncts first.
    """
    escape = order_escape(i, j, eps_t)
    out: list[Clause | bool] = []
    for c in body:
        if c is True:
            continue
        out.append(Clause.of([escape] if c is False else c.disjuncts + (escape,)))
    return out


@dataclass(frozen=True)
class FixedPlacement:
    """An object already on the plate, entering the formula as constants."""

    obj: PrintObject
    x: Fraction
    y: Fraction
    t: Fraction

    @property
    def position(self) -> Point2:
        return Point2(self.x, self.y)


def pair_pop(
    pos_i: Position, obj_i: PrintObject, pos_j: Position, env_j: ConvexPolygon
) -> list[Clause | bool]:
    """PoP both ways between the hull of an earlier object and a later envelope."""
    return pop_constraint(pos_i, obj_i.footprint, pos_j, env_j) + pop_constraint(
        pos_j, env_j, pos_i, obj_i.footprint
    )


def time_window(n_new: int, eps_t, fixed: Sequence[FixedPlacement] = ()) -> tuple[Fraction, bool, Fraction]:
    """(lower, lower_is_strict, upper) bounds on new T variables."""
    eps_t = as_rational(eps_t)
    if fixed:
        lo = max(f.t for f in fixed) + eps_t
        return lo, True, lo + n_new * eps_t
    return ZERO, False, n_new * eps_t


def build_base_formula(
    objects: Sequence[PrintObject],
    extruder: ExtruderProfile,
    eps_t=1,
    fixed: Sequence[FixedPlacement] = (),
    envelopes: Sequence[ConvexPolygon] | None = None,
) -> Formula:
    """Separation, order-guarded PoP and time bounds for one group of objects.

    Object ``i`` of ``objects`` owns variables ``X_i, Y_i, T_i``.  Objects in
    ``fixed`` are already placed and all earlier in time, so their
    constraints are asserted without guards.
    """
    if not objects:
        raise ValueError("need at least one object")
    eps_t = as_rational(eps_t)
    if envelopes is None:
        envelopes = [envelope_hull(o, extruder) for o in objects]
    n = len(objects)
    f = Formula()
    for i in range(n):
        f.declare(X(i), Y(i), T(i))
    lo, strict, hi = time_window(n, eps_t, fixed)
    for i in range(n):
        f.add(Clause.of([(const(lo) - var(T(i))).lt0() if strict else (const(lo) - var(T(i))).le0()]))
        f.add(Clause.of([(var(T(i)) - const(hi)).le0()]))
    for i, j in itertools.combinations(range(n), 2):
        f.add(time_separation(i, j, eps_t))
    for i in range(n):
        for j in range(n):
            if i != j:
                f.extend(guard_with_order(i, j, eps_t, pair_pop(i, objects[i], j, envelopes[j])))
    # Fixed objects are always earlier, so only their hulls matter.
    for fp in fixed:
        for j in range(n):
            f.extend(pair_pop(fp.position, fp.obj, j, envelopes[j]))
    return f
