"""Independent exact check of a schedule; no solver involved."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .engine import PlateAssignment, Schedule
from .geometry import (
    ConvexPolygon,
    ExtruderProfile,
    InvalidSigma,
    Plate,
    PrintObject,
    cross,
    envelope_hull,
    polygons_overlap,
    scale_plate,
)

COLLISION = "collision"  # earlier hull overlaps a later envelope
PLATE = "plate"  # hull leaves its sigma-plate
TRAVERSABILITY = "traversability"  # earlier object at least as tall overlaps a later one
COVERAGE = "coverage"
ORDER = "order"

_EDGE_NAMES = ("bottom", "right", "top", "left")


@dataclass(frozen=True)
class Violation:
    kind: str
    plate_index: Optional[int]
    objects: tuple[str, ...]
    detail: str

    def __str__(self) -> str:
        where = "" if self.plate_index is None else f"plate {self.plate_index}: "
        return f"{where}{self.kind} [{', '.join(self.objects)}] {self.detail}"


def _outside_edges(hull: ConvexPolygon, container: ConvexPolygon) -> list[int]:
    out = []
    for k, (e1, e2) in enumerate(container.edges()):
        if any(cross(e2 - e1, v - e1) < 0 for v in hull.vertices):
            out.append(k)
    return out


def _check_plate(
    pa: PlateAssignment,
    objs: dict[str, PrintObject],
    extruder: ExtruderProfile,
    plate: Plate,
) -> list[Violation]:
    found: list[Violation] = []
    idx = pa.plate_index
    for group in pa.groups:
        try:
            container = scale_plate(plate, group.sigma, pa.anchor)
        except (InvalidSigma, ValueError) as exc:
            ids = tuple(p.obj_id for p in group.entries)
            found.append(Violation(PLATE, idx, ids, f"bad sigma-plate: {exc}"))
            continue
        for p in group.entries:
            placed = objs[p.obj_id].footprint.translated(p.position)
            for k in _outside_edges(placed, container):
                name = _EDGE_NAMES[k] if len(container) == 4 else f"#{k}"
                found.append(
                    Violation(PLATE, idx, (p.obj_id,), f"outside the {name} edge at sigma={group.sigma}")
                )

    order = pa.placements
    for a, b in zip(order, order[1:]):
        if not a.t < b.t:
            found.append(Violation(ORDER, idx, (a.obj_id, b.obj_id), f"equal print times t={a.t}"))

    for first, later in itertools.combinations(order, 2):
        if first.t == later.t:
            continue
        oi, oj = objs[first.obj_id], objs[later.obj_id]
        if polygons_overlap(oi.footprint, first.position, envelope_hull(oj, extruder), later.position):
            found.append(
                Violation(COLLISION, idx, (oi.id, oj.id), "earlier hull overlaps the later envelope")
            )
        if oi.height >= oj.height and polygons_overlap(
            oi.footprint, first.position, oj.footprint, later.position
        ):
            found.append(
                Violation(TRAVERSABILITY, idx, (oi.id, oj.id), "earlier object blocks the later one's top")
            )
    return found


def verify_schedule(
    schedule: Schedule,
    objects: Sequence[PrintObject],
    extruder: ExtruderProfile,
    plate: Plate,
) -> list[Violation]:
    """All requirement violations of ``schedule``; empty when the schedule is clean."""
    objs = {o.id: o for o in objects}
    violations: list[Violation] = []
    placed = Counter(schedule.object_ids())
    wanted = Counter(o.id for o in objects)
    for oid in sorted(set(placed) | set(wanted)):
        if placed[oid] != wanted[oid]:
            violations.append(
                Violation(COVERAGE, None, (oid,), f"placed {placed[oid]} times, expected {wanted[oid]}")
            )
    for pa in schedule.plates:
        unknown = [p.obj_id for g in pa.groups for p in g.entries if p.obj_id not in objs]
        if unknown:
            violations.append(Violation(COVERAGE, pa.plate_index, tuple(unknown), "unknown object id"))
            continue
        violations.extend(_check_plate(pa, objs, extruder, plate))
    return violations
