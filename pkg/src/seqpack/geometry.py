"""Exact 2D geometry over rationals.

Every coordinate is a :class:`fractions.Fraction`; no predicate in this module
depends on a tolerance.  Polygons are convex, counter-clockwise, strictly
convex and start at their lexicographically smallest vertex, so two equal
polygons compare equal as values.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence, Union

RationalLike = Union[int, str, Fraction, Decimal, float]


class DegenerateInput(ValueError):
    """Too few distinct points, or all of them collinear."""


class InvalidSigma(ValueError):
    pass


class InvalidPolygon(ValueError):
    pass


def as_rational(value: RationalLike) -> Fraction:
    """Convert to an exact Fraction.

    Strings and Decimals are read exactly ("0.1" is 1/10).  Floats go through
    their shortest decimal repr, which is what a user typing them meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a coordinate")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, (str, Decimal)):
        return Fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


class Point2(NamedTuple):
    x: Fraction
    y: Fraction

    def __add__(self, other):  # type: ignore[override]
        return Point2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Point2(self.x - other[0], self.y - other[1])

    def __neg__(self):
        return Point2(-self.x, -self.y)

    def scaled(self, factor: Fraction) -> Point2:
        return Point2(self.x * factor, self.y * factor)


ORIGIN = Point2(Fraction(0), Fraction(0))


def pt(x: RationalLike, y: RationalLike) -> Point2:
    return Point2(as_rational(x), as_rational(y))


def cross(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def orientation(a: Point2, b: Point2, c: Point2) -> int:
    """Sign of the turn a -> b -> c: 1 left, -1 right, 0 collinear."""
    d = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    return (d > 0) - (d < 0)


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple[Point2, ...]

    def __post_init__(self):
        verts = tuple(Point2(as_rational(v[0]), as_rational(v[1])) for v in self.vertices)
        n = len(verts)
        if n < 3:
            raise InvalidPolygon(f"polygon needs at least 3 vertices, got {n}")
        if len(set(verts)) != n:
            raise InvalidPolygon("duplicate vertices")
        for i in range(n):
            if orientation(verts[i], verts[(i + 1) % n], verts[(i + 2) % n]) <= 0:
                raise InvalidPolygon(
                    f"not strictly convex counter-clockwise at vertex {(i + 1) % n}"
                )
        verts = _normalize(verts)
        # All left turns still admits star polygons that wind more than once.
        if _hull_chain(list(verts)) != list(verts):
            raise InvalidPolygon("vertex sequence is not a simple convex polygon")
        object.__setattr__(self, "vertices", verts)

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def edges(self) -> list[tuple[Point2, Point2]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def translated(self, offset: Sequence[Fraction]) -> ConvexPolygon:
        d = Point2(as_rational(offset[0]), as_rational(offset[1]))
        return _trusted_polygon(tuple(v + d for v in self.vertices))

    def negated(self) -> ConvexPolygon:
        return _trusted_polygon(_normalize(tuple(-v for v in self.vertices)))

    def area(self) -> Fraction:
        v = self.vertices
        return sum((cross(v[i], v[(i + 1) % len(v)]) for i in range(len(v))), Fraction(0)) / 2

    def bounds(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def contains_point(self, p: Sequence[Fraction], strict: bool = False) -> bool:
        """Point-in-polygon by half-planes; boundary counts unless ``strict``."""
        p = Point2(p[0], p[1])
        for a, b in self.edges():
            o = orientation(a, b, p)
            if o < 0 or (strict and o == 0):
                return False
        return True

    @classmethod
    def rectangle(cls, x0, y0, x1, y1) -> ConvexPolygon:
        x0, y0, x1, y1 = map(as_rational, (x0, y0, x1, y1))
        if not (x0 < x1 and y0 < y1):
            raise InvalidPolygon("empty rectangle")
        return cls((Point2(x0, y0), Point2(x1, y0), Point2(x1, y1), Point2(x0, y1)))


def _trusted_polygon(verts: tuple[Point2, ...]) -> ConvexPolygon:
    # Skip validation for results of operations that preserve convexity.
    poly = object.__new__(ConvexPolygon)
    object.__setattr__(poly, "vertices", _normalize(verts))
    return poly


def _normalize(verts: tuple[Point2, ...]) -> tuple[Point2, ...]:
    start = min(range(len(verts)), key=verts.__getitem__)
    return verts[start:] + verts[:start]


def _hull_chain(points: list[Point2]) -> list[Point2]:
    """Andrew's monotone chain; collinear points dropped.  Input need not be unique."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts
    lower: list[Point2] = []
    for p in pts:
        while len(lower) >= 2 and orientation(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point2] = []
    for p in reversed(pts):
        while len(upper) >= 2 and orientation(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def convex_hull(points: Iterable[Sequence[RationalLike]]) -> ConvexPolygon:
    pts = [Point2(as_rational(p[0]), as_rational(p[1])) for p in points]
    if len(set(pts)) < 3:
        raise DegenerateInput(f"need 3 distinct points, got {len(set(pts))}")
    chain = _hull_chain(pts)
    if len(chain) < 3:
        raise DegenerateInput("all points are collinear")
    return _trusted_polygon(tuple(chain))


def _bottom_first(verts: tuple[Point2, ...]) -> list[Point2]:
    start = min(range(len(verts)), key=lambda i: (verts[i].y, verts[i].x))
    return list(verts[start:] + verts[:start])


def minkowski_sum(a: ConvexPolygon, b: ConvexPolygon) -> ConvexPolygon:
    """Edge-merge Minkowski sum of two convex polygons, O(|a| + |b|)."""
    p = _bottom_first(a.vertices)
    q = _bottom_first(b.vertices)
    n, m = len(p), len(q)
    p += p[:2]
    q += q[:2]
    out: list[Point2] = []
    i = j = 0
    while i < n or j < m:
        out.append(p[i] + q[j])
        c = cross(p[i + 1] - p[i], q[j + 1] - q[j])
        if c >= 0 and i < n:
            i += 1
        if c <= 0 and j < m:
            j += 1
    return _trusted_polygon(tuple(out))


@dataclass(frozen=True)
class PrintObject:
    id: str
    footprint: ConvexPolygon
    height: Fraction

    def __post_init__(self):
        object.__setattr__(self, "height", as_rational(self.height))
        if self.height <= 0:
            raise ValueError(f"object {self.id!r}: height must be positive")
        if not isinstance(self.footprint, ConvexPolygon):
            raise TypeError("footprint must be a ConvexPolygon")

    @classmethod
    def cuboid(cls, id: str, length, width, height) -> PrintObject:
        return cls(id, ConvexPolygon.rectangle(0, 0, length, width), as_rational(height))


@dataclass(frozen=True)
class ExtruderProfile:
    """Footprint of the moving printer parts, nozzle at the origin.

    A single-vertex profile ``(ORIGIN,)`` models an ideal point nozzle.
    """

    vertices: tuple[Point2, ...]

    def __post_init__(self):
        verts = tuple(Point2(as_rational(v[0]), as_rational(v[1])) for v in self.vertices)
        if len(verts) == 1:
            if verts[0] != ORIGIN:
                raise InvalidPolygon("a point extruder must sit at the origin")
        else:
            poly = ConvexPolygon(verts)
            if not poly.contains_point(ORIGIN):
                raise InvalidPolygon("extruder footprint must contain the nozzle point (0,0)")
            verts = poly.vertices
        object.__setattr__(self, "vertices", verts)

    @property
    def is_point(self) -> bool:
        return len(self.vertices) == 1

    @property
    def footprint(self) -> ConvexPolygon:
        if self.is_point:
            raise InvalidPolygon("point extruder has no polygon footprint")
        return _trusted_polygon(self.vertices)

    @classmethod
    def point(cls) -> ExtruderProfile:
        return cls((ORIGIN,))

    @classmethod
    def square(cls, side) -> ExtruderProfile:
        h = as_rational(side) / 2
        return cls(ConvexPolygon.rectangle(-h, -h, h, h).vertices)

    @classmethod
    def from_points(cls, points) -> ExtruderProfile:
        return cls(convex_hull(points).vertices)


@dataclass(frozen=True)
class Plate:
    width: Fraction
    height: Fraction

    def __post_init__(self):
        object.__setattr__(self, "width", as_rational(self.width))
        object.__setattr__(self, "height", as_rational(self.height))
        if self.width <= 0 or self.height <= 0:
            raise ValueError("plate dimensions must be positive")

    @property
    def polygon(self) -> ConvexPolygon:
        return ConvexPolygon.rectangle(0, 0, self.width, self.height)

    @property
    def center(self) -> Point2:
        return Point2(self.width / 2, self.height / 2)


def envelope_hull(obj: PrintObject, extruder: ExtruderProfile) -> ConvexPolygon:
    if extruder.is_point:
        return obj.footprint
    return minkowski_sum(obj.footprint, extruder.footprint)


def scale_plate(plate: Plate, sigma: RationalLike, anchor: Sequence[RationalLike]) -> ConvexPolygon:
    """The plate shrunk by ``sigma`` towards ``anchor`` (which stays fixed)."""
    sigma = as_rational(sigma)
    if not (0 < sigma <= 1):
        raise InvalidSigma(f"sigma must lie in (0, 1], got {sigma}")
    a = Point2(as_rational(anchor[0]), as_rational(anchor[1]))
    if not plate.polygon.contains_point(a):
        raise ValueError(f"anchor {a} lies outside the plate")
    return _trusted_polygon(tuple(a + (p - a).scaled(sigma) for p in plate.polygon.vertices))


def _on_segment(p: Point2, q: Point2, r: Point2) -> bool:
    # r collinear with p-q: inside the bounding box means on the segment
    return min(p.x, q.x) <= r.x <= max(p.x, q.x) and min(p.y, q.y) <= r.y <= max(p.y, q.y)


def segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool:
    """Closed segments p1-p2 and q1-q2 share at least one point."""
    d1 = orientation(q1, q2, p1)
    d2 = orientation(q1, q2, p2)
    d3 = orientation(p1, p2, q1)
    d4 = orientation(p1, p2, q2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


def polygons_overlap(
    a: ConvexPolygon, da: Sequence[Fraction], b: ConvexPolygon, db: Sequence[Fraction]
) -> bool:
    """Interiors of ``a + da`` and ``b + db`` intersect; touching is not overlap.

    Equivalent to ``db - da`` lying strictly inside ``a ⊕ (-b)``.
    """
    diff = Point2(as_rational(db[0]) - as_rational(da[0]), as_rational(db[1]) - as_rational(da[1]))
    return minkowski_sum(a, b.negated()).contains_point(diff, strict=True)
