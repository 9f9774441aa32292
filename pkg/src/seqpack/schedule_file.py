"""Schedule files: JSON with 12-significant-digit decimals and exact ``p/q`` twins."""

from __future__ import annotations

import json
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .engine import Placement, PlacementGroup, PlateAssignment, Schedule
from .geometry import Point2

FORMAT_VERSION = 1
SIGNIFICANT_DIGITS = 12


class ScheduleFileError(ValueError):
    pass


def decimal_str(q: Fraction, digits: int = SIGNIFICANT_DIGITS) -> str:
    """``q`` rounded to ``digits`` significant digits, in plain positional notation."""
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(q.numerator) / Decimal(q.denominator)
    if d == 0:
        return "0"
    return format(d.normalize(), "f")


def exact_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def schedule_to_dict(schedule: Schedule, record_timing: bool = False) -> dict:
    plates = []
    for pa in schedule.plates:
        order = {p.obj_id: k for k, p in enumerate(pa.placements, start=1)}
        plates.append(
            {
                "plate_index": pa.plate_index,
                "sigma": decimal_str(pa.sigma),
                "sigma_exact": exact_str(pa.sigma),
                "anchor": [decimal_str(pa.anchor.x), decimal_str(pa.anchor.y)],
                "anchor_exact": [exact_str(pa.anchor.x), exact_str(pa.anchor.y)],
                "groups": [
                    {
                        "sigma": decimal_str(g.sigma),
                        "sigma_exact": exact_str(g.sigma),
                        "sigma_lower_exact": exact_str(g.sigma_lower),
                        "ids": [p.obj_id for p in sorted(g.entries, key=lambda p: p.t)],
                    }
                    for g in pa.groups
                ],
                "placements": [
                    {
                        "id": p.obj_id,
                        "x": decimal_str(p.x),
                        "y": decimal_str(p.y),
                        "x_exact": exact_str(p.x),
                        "y_exact": exact_str(p.y),
                        "order": order[p.obj_id],
                    }
                    for p in pa.placements
                ],
            }
        )
    return {
        "format": FORMAT_VERSION,
        "strategy": schedule.strategy,
        "plates": plates,
        "stats": {
            "plates_used": schedule.plates_used,
            "objects_per_plate": schedule.objects_per_plate,
            "wall_time_ms": round(schedule.wall_time_s * 1000) if record_timing else None,
        },
    }


def dumps_schedule(schedule: Schedule, record_timing: bool = False) -> str:
    return json.dumps(schedule_to_dict(schedule, record_timing), indent=2) + "\n"


def write_schedule(schedule: Schedule, path: str | Path, record_timing: bool = False) -> None:
    Path(path).write_text(dumps_schedule(schedule, record_timing))


def _exact(entry: dict, key: str, where: str) -> Fraction:
    raw: Optional[Any] = entry.get(f"{key}_exact", entry.get(key))
    if raw is None:
        raise ScheduleFileError(f"{where}: missing {key!r}")
    try:
        return Fraction(str(raw))
    except (ValueError, ZeroDivisionError):
        raise ScheduleFileError(f"{where}: bad number {raw!r} for {key!r}") from None


def schedule_from_dict(data: dict) -> Schedule:
    """Rebuild a schedule; print times become the 1-based order numbers."""
    try:
        plates = []
        for k, pd in enumerate(data["plates"]):
            where = f"plates[{k}]"
            anchor_raw = pd.get("anchor_exact", pd.get("anchor"))
            anchor = Point2(Fraction(str(anchor_raw[0])), Fraction(str(anchor_raw[1])))
            placements = {}
            orders = []
            for j, e in enumerate(pd["placements"]):
                w = f"{where}.placements[{j}]"
                order = e["order"]
                if not isinstance(order, int) or isinstance(order, bool):
                    raise ScheduleFileError(f"{w}: order must be an integer")
                orders.append(order)
                placements[e["id"]] = Placement(
                    e["id"], _exact(e, "x", w), _exact(e, "y", w), Fraction(order)
                )
            if sorted(orders) != list(range(1, len(orders) + 1)):
                raise ScheduleFileError(f"{where}: order values must be 1..{len(orders)}")
            if "groups" in pd:
                groups = []
                for j, gd in enumerate(pd["groups"]):
                    w = f"{where}.groups[{j}]"
                    entries = [placements.pop(i) for i in gd["ids"]]
                    lower = Fraction(str(gd.get("sigma_lower_exact", 0)))
                    groups.append(PlacementGroup(entries, _exact(gd, "sigma", w), lower))
                if placements:
                    raise ScheduleFileError(f"{where}: placements {sorted(placements)} belong to no group")
            else:
                # a hand-written file may omit groups: one group at the plate sigma
                groups = [PlacementGroup(list(placements.values()), _exact(pd, "sigma", where))]
            plates.append(PlateAssignment(pd.get("plate_index", k), groups, anchor))
        stats = data.get("stats") or {}
        wall = stats.get("wall_time_ms")
        return Schedule(plates, data.get("strategy", ""), (wall or 0) / 1000)
    except ScheduleFileError:
        raise
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ScheduleFileError(f"malformed schedule file: {exc!r}") from None


def load_schedule(path: str | Path) -> Schedule:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScheduleFileError(f"cannot read schedule {path}: {exc}") from None
    return schedule_from_dict(data)
