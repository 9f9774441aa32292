"""CEGAR packing and scheduling: bounded solve, sigma bisection, plate loop.

Objects are handled in groups of at most ``group_size``.  A group is solved
against the objects already placed on the plate (entering the formula as
constants, all earlier in print order), the plate is shrunk towards the
tactic anchor by bisection on ``sigma``, and edge-intersection constraints
are added lazily whenever a model places an earlier hull across a later
envelope.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .constraints import (
    T,
    X,
    Y,
    FixedPlacement,
    Formula,
    build_base_formula,
    guard_with_order,
    lni_constraint,
    pip_constraint,
)
from .geometry import (
    ConvexPolygon,
    ExtruderProfile,
    Plate,
    Point2,
    PrintObject,
    as_rational,
    envelope_hull,
    scale_plate,
    segments_intersect,
)
from .solver import INTERNAL, SolverSession, solve
from .strategy import CompositeStrategy, apply_ordering, tactic_anchor

log = logging.getLogger(__name__)


class EngineError(RuntimeError):
    pass


class InstanceError(EngineError):
    """Some object does not fit on an empty plate."""


class InfeasibleAtOne(EngineError):
    """The group cannot be placed even on the unshrunk plate."""


class SolveTimeout(EngineError):
    pass


class RefinementCapExceeded(EngineError):
    """The refinement loop ran past its termination bound, which indicates a bug."""


@dataclass(frozen=True)
class EngineConfig:
    eps_t: Fraction = Fraction(1)
    eps_xy: Fraction = Fraction(1, 1024)
    group_size: int = 4
    timeout_s: Optional[float] = 60.0
    refinement_cap: Optional[int] = None
    backend: str = INTERNAL
    smtlib_dump: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "eps_t", as_rational(self.eps_t))
        object.__setattr__(self, "eps_xy", as_rational(self.eps_xy))
        if self.eps_t <= 0 or self.eps_xy <= 0:
            raise ValueError("eps_t and eps_xy must be positive")
        if self.group_size < 1:
            raise ValueError("group size must be at least 1")
        if self.timeout_s is not None and self.timeout_s <= 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class Placement:
    obj_id: str
    x: Fraction
    y: Fraction
    t: Fraction

    @property
    def position(self) -> Point2:
        return Point2(self.x, self.y)


@dataclass
class PlacementGroup:
    entries: list[Placement]
    sigma: Fraction = Fraction(1)
    # last infeasible probe (0 when none was infeasible)
    sigma_lower: Fraction = Fraction(0)
    probes: list[tuple[Fraction, bool]] = field(default_factory=list)
    refinements: int = 0
    first_model_intersections: int = 0


@dataclass
class PlateAssignment:
    plate_index: int
    groups: list[PlacementGroup]
    anchor: Point2

    @property
    def sigma(self) -> Fraction:
        return self.groups[-1].sigma

    @property
    def placements(self) -> list[Placement]:
        """All placements in print order."""
        return sorted((p for g in self.groups for p in g.entries), key=lambda p: p.t)

    def __len__(self) -> int:
        return sum(len(g.entries) for g in self.groups)


@dataclass
class Schedule:
    plates: list[PlateAssignment]
    strategy: str
    wall_time_s: float = 0.0

    @property
    def plates_used(self) -> int:
        return len(self.plates)

    @property
    def objects_per_plate(self) -> list[int]:
        return [len(p) for p in self.plates]

    @property
    def sigma_sum(self) -> Fraction:
        return sum((p.sigma for p in self.plates), Fraction(0))

    def object_ids(self) -> list[str]:
        return [pl.obj_id for p in self.plates for pl in p.placements]


# -- bounded solve ----------------------------------------------------------


@dataclass
class _GroupContext:
    """Immutable inputs of one group solve plus the session carrying learned clauses."""

    group: Sequence[PrintObject]
    envelopes: Sequence[ConvexPolygon]
    fixed: Sequence[FixedPlacement]
    session: SolverSession
    config: EngineConfig
    refinements: int = 0
    first_model_intersections: Optional[int] = None

    def refinement_bound(self) -> int:
        hulls = [len(o.footprint) for o in self.group]
        envs = [len(e) for e in self.envelopes]
        n = len(self.group)
        bound = sum(hulls[i] * envs[j] for i in range(n) for j in range(n) if i != j)
        bound += sum(len(f.obj.footprint) for f in self.fixed) * sum(envs)
        # each round adds a new clause; one edge pair yields at most 2**6 flattened clauses
        return 64 * bound + 1


def group_context(
    group: Sequence[PrintObject],
    extruder: ExtruderProfile,
    fixed: Sequence[FixedPlacement],
    config: EngineConfig,
) -> _GroupContext:
    envelopes = [envelope_hull(o, extruder) for o in group]
    session = SolverSession(
        backend=config.backend,
        smtlib_dump=config.smtlib_dump,
    )
    session.assert_clauses(
        build_base_formula(group, extruder, config.eps_t, fixed=fixed, envelopes=envelopes).clauses
    )
    # declare every group variable even if a group of one leaves X, Y unconstrained
    session.formula.variables.update(v(i) for i in range(len(group)) for v in (X, Y, T))
    return _GroupContext(group, envelopes, fixed, session, config)


def _bbox_touch(a, b) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


def _intersecting_edges(
    hull: ConvexPolygon, hull_at: Point2, env: ConvexPolygon, env_at: Point2
) -> list[tuple[int, int]]:
    placed_h = hull.translated(hull_at)
    placed_e = env.translated(env_at)
    if not _bbox_touch(placed_h.bounds(), placed_e.bounds()):
        return []
    he, ee = placed_h.edges(), placed_e.edges()
    return [
        (a, b)
        for a, (p1, p2) in enumerate(he)
        for b, (q1, q2) in enumerate(ee)
        if segments_intersect(p1, p2, q1, q2)
    ]


def _refine(ctx: _GroupContext, model) -> int:
    """Add guarded edge constraints for every earlier-hull/later-envelope crossing."""
    n = len(ctx.group)
    eps_t = ctx.config.eps_t
    pos = [Point2(model[X(i)], model[Y(i)]) for i in range(n)]
    times = [model[T(i)] for i in range(n)]
    found = 0
    added = 0
    formula: Formula = ctx.session.formula
    # fixed objects are earlier than every group member
    for f in ctx.fixed:
        for j in range(n):
            hits = _intersecting_edges(f.obj.footprint, f.position, ctx.envelopes[j], pos[j])
            found += len(hits)
            for a, b in hits:
                a1, a2 = f.obj.footprint.edges()[a]
                b1, b2 = ctx.envelopes[j].edges()[b]
                added += formula.extend(lni_constraint(f.position, a1, a2, j, b1, b2))
    for i in range(n):
        for j in range(n):
            if i == j or not times[i] < times[j]:
                continue
            hits = _intersecting_edges(ctx.group[i].footprint, pos[i], ctx.envelopes[j], pos[j])
            found += len(hits)
            for a, b in hits:
                a1, a2 = ctx.group[i].footprint.edges()[a]
                b1, b2 = ctx.envelopes[j].edges()[b]
                added += formula.extend(
                    guard_with_order(i, j, eps_t, lni_constraint(i, a1, a2, j, b1, b2))
                )
    if ctx.first_model_intersections is None:
        ctx.first_model_intersections = found
    if found and not added:
        raise RefinementCapExceeded("intersection found but every constraint was already present")
    return found


def solve_bounded(ctx: _GroupContext, sigma_plate: ConvexPolygon) -> Optional[list[Placement]]:
    """CEGAR loop at one plate size; None when the group does not fit.

    Learned edge constraints stay in ``ctx.session.formula``; the containment
    clauses for ``sigma_plate`` are scoped to this call.
    """
    session = ctx.session
    cap = ctx.config.refinement_cap or ctx.refinement_bound()
    pip = [c for i, o in enumerate(ctx.group) for c in pip_constraint(i, o.footprint, sigma_plate)]
    timeout = ctx.config.timeout_s
    deadline = None if timeout is None else time.monotonic() + timeout
    for _ in range(cap):
        if deadline is not None:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise SolveTimeout("bounded solve exceeded its deadline")
            session.timeout_s = remaining
        session.push()
        session.assert_clauses(pip)
        try:
            result = solve(session)
        finally:
            session.pop()
        if result.status == "timeout":
            raise SolveTimeout("bounded solve exceeded its deadline")
        if result.is_unsat:
            return None
        model = result.assignment
        if _refine(ctx, model) == 0:
            return [
                Placement(o.id, model[X(i)], model[Y(i)], model[T(i)])
                for i, o in enumerate(ctx.group)
            ]
        ctx.refinements += 1
    raise RefinementCapExceeded(f"more than {cap} refinement rounds")


def bisect_sigma(
    ctx: _GroupContext, plate: Plate, anchor: Point2
) -> PlacementGroup:
    """Smallest feasible sigma (within eps_xy) for the group, after a sigma=1 check."""
    eps = ctx.config.eps_xy
    probes: list[tuple[Fraction, bool]] = []
    best = solve_bounded(ctx, scale_plate(plate, 1, anchor))
    probes.append((Fraction(1), best is not None))
    if best is None:
        raise InfeasibleAtOne(f"group of {len(ctx.group)} does not fit at sigma=1")
    lo, hi = Fraction(0), Fraction(1)
    while hi - lo > eps:
        mid = (lo + hi) / 2
        found = solve_bounded(ctx, scale_plate(plate, mid, anchor))
        probes.append((mid, found is not None))
        if found is None:
            lo = mid
        else:
            hi, best = mid, found
    return PlacementGroup(
        entries=best,
        sigma=hi,
        sigma_lower=lo,
        probes=probes,
        refinements=ctx.refinements,
        first_model_intersections=ctx.first_model_intersections or 0,
    )


def probe_group(
    plate: Plate,
    extruder: ExtruderProfile,
    group: Sequence[PrintObject],
    fixed: Sequence[FixedPlacement],
    sigma,
    anchor: Point2,
    config: EngineConfig,
) -> Optional[list[Placement]]:
    """Solve one group at a single sigma from a fresh formula."""
    ctx = group_context(group, extruder, fixed, config)
    return solve_bounded(ctx, scale_plate(plate, sigma, anchor))


# -- plate loop ---------------------------------------------------------------


def fits_alone(obj: PrintObject, plate: Plate) -> bool:
    x0, y0, x1, y1 = obj.footprint.bounds()
    return x1 - x0 <= plate.width and y1 - y0 <= plate.height


def solve_cegar_seq(
    plate: Plate,
    objects: Sequence[PrintObject],
    extruder: ExtruderProfile,
    strategy: CompositeStrategy,
    config: EngineConfig = EngineConfig(),
) -> Schedule:
    started = time.monotonic()
    for o in objects:
        if not fits_alone(o, plate):
            raise InstanceError(f"object {o.id!r} does not fit on an empty plate")
    anchor = tactic_anchor(strategy.tactic, plate)
    rng = random.Random(strategy.ordering.seed or 0)
    remaining = list(objects)
    plates: list[PlateAssignment] = []
    while remaining:
        remaining = apply_ordering(strategy.ordering, remaining, rng)
        groups: list[PlacementGroup] = []
        fixed: list[FixedPlacement] = []
        by_id = {o.id: o for o in remaining}
        while remaining:
            m = min(config.group_size, len(remaining))
            placed = None
            while m >= 1:
                ctx = group_context(remaining[:m], extruder, fixed, config)
                try:
                    placed = bisect_sigma(ctx, plate, anchor)
                    break
                except InfeasibleAtOne:
                    m -= 1
            if placed is None:
                if not fixed:
                    raise InstanceError(f"object {remaining[0].id!r} cannot be placed on an empty plate")
                break
            log.debug(
                "%s plate %d: group of %d at sigma=%s (%d refinements)",
                strategy.name, len(plates), m, placed.sigma, placed.refinements,
            )
            groups.append(placed)
            fixed.extend(
                FixedPlacement(by_id[p.obj_id], p.x, p.y, p.t) for p in placed.entries
            )
            remaining = remaining[m:]
        plates.append(PlateAssignment(len(plates), groups, anchor))
    return Schedule(plates, strategy.name, time.monotonic() - started)
