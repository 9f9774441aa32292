"""Scene files: plate, extruder and objects as JSON with exact decimal values.

Numbers may be JSON numbers or strings (``"0.1"``, ``"1/3"``); both parse to
exact rationals, never through binary floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any

from .geometry import (
    ConvexPolygon,
    DegenerateInput,
    ExtruderProfile,
    InvalidPolygon,
    Plate,
    PrintObject,
    convex_hull,
)

# Placeholder printer head: a 20 mm square around the nozzle.
DEFAULT_EXTRUDER_SIDE = 20


class SceneError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass(frozen=True)
class Scene:
    plate: Plate
    extruder: ExtruderProfile
    objects: tuple[PrintObject, ...]

    def object(self, obj_id: str) -> PrintObject:
        for o in self.objects:
            if o.id == obj_id:
                return o
        raise KeyError(obj_id)


def _number(value: Any, path: str) -> Fraction:
    if isinstance(value, bool) or value is None:
        raise SceneError(path, f"expected a number, got {value!r}")
    if isinstance(value, (int, Decimal)):
        return Fraction(value)
    if isinstance(value, float):
        # only reachable when the caller parsed JSON itself
        return Fraction(Decimal(repr(value)))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise SceneError(path, f"not a rational number: {value!r}") from None
    raise SceneError(path, f"expected a number, got {type(value).__name__}")


def _positive(value: Any, path: str) -> Fraction:
    q = _number(value, path)
    if q <= 0:
        raise SceneError(path, f"must be positive, got {value}")
    return q


def _mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise SceneError(path, "expected an object")
    return value


def _points(value: Any, path: str) -> list[tuple[Fraction, Fraction]]:
    if not isinstance(value, list) or not value:
        raise SceneError(path, "expected a non-empty list of [x, y] points")
    out = []
    for k, p in enumerate(value):
        if not isinstance(p, list) or len(p) != 2:
            raise SceneError(f"{path}[{k}]", "expected [x, y]")
        out.append((_number(p[0], f"{path}[{k}][0]"), _number(p[1], f"{path}[{k}][1]")))
    return out


def _footprint(value: Any, path: str) -> ConvexPolygon:
    pts = _points(value, path)
    if len(set(pts)) < 3:
        raise SceneError(path, "a footprint needs at least 3 distinct vertices")
    try:
        return convex_hull(pts)
    except DegenerateInput as exc:
        raise SceneError(path, str(exc)) from None


def parse_scene(data: Any) -> Scene:
    """Build a scene from already-decoded JSON data."""
    data = _mapping(data, "scene")
    if "plate" not in data:
        raise SceneError("plate", "missing")
    plate_d = _mapping(data["plate"], "plate")
    plate = Plate(
        _positive(plate_d.get("width"), "plate.width"),
        _positive(plate_d.get("height"), "plate.height"),
    )

    ext_d = data.get("extruder")
    if ext_d is None:
        extruder = ExtruderProfile.square(DEFAULT_EXTRUDER_SIDE)
    else:
        pts = _points(_mapping(ext_d, "extruder").get("footprint"), "extruder.footprint")
        try:
            if set(pts) == {(0, 0)}:
                extruder = ExtruderProfile.point()
            else:
                extruder = ExtruderProfile.from_points(pts)
        except (DegenerateInput, InvalidPolygon) as exc:
            raise SceneError("extruder.footprint", str(exc)) from None

    objs_d = data.get("objects")
    if not isinstance(objs_d, list) or not objs_d:
        raise SceneError("objects", "expected a non-empty list")
    objects: list[PrintObject] = []
    seen: set[str] = set()
    for k, od in enumerate(objs_d):
        path = f"objects[{k}]"
        od = _mapping(od, path)
        oid = od.get("id")
        if not isinstance(oid, str) or not oid:
            raise SceneError(f"{path}.id", "expected a non-empty string")
        if oid in seen:
            raise SceneError(f"{path}.id", f"duplicate object id {oid!r}")
        seen.add(oid)
        if "cuboid" in od:
            cd = _mapping(od["cuboid"], f"{path}.cuboid")
            objects.append(
                PrintObject.cuboid(
                    oid,
                    _positive(cd.get("length"), f"{path}.cuboid.length"),
                    _positive(cd.get("width"), f"{path}.cuboid.width"),
                    _positive(cd.get("height"), f"{path}.cuboid.height"),
                )
            )
        else:
            if "footprint" not in od:
                raise SceneError(path, "needs either 'footprint' and 'height' or 'cuboid'")
            footprint = _footprint(od["footprint"], f"{path}.footprint")
            objects.append(PrintObject(oid, footprint, _positive(od.get("height"), f"{path}.height")))
    return Scene(plate, extruder, tuple(objects))


def loads_scene(text: str) -> Scene:
    try:
        data = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise SceneError("scene", f"invalid JSON: {exc}") from None
    return parse_scene(data)


def load_scene(path: str | Path) -> Scene:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SceneError("scene", f"cannot read {path}: {exc}") from None
    return loads_scene(text)


def _num_out(q: Fraction):
    return q.numerator if q.denominator == 1 else str(q)


def scene_to_dict(scene: Scene) -> dict:
    """JSON-ready form; non-integers are written as exact ``"p/q"`` strings."""
    ext = scene.extruder
    return {
        "plate": {"width": _num_out(scene.plate.width), "height": _num_out(scene.plate.height)},
        "extruder": {"footprint": [[_num_out(v.x), _num_out(v.y)] for v in ext.vertices]},
        "objects": [
            {
                "id": o.id,
                "height": _num_out(o.height),
                "footprint": [[_num_out(v.x), _num_out(v.y)] for v in o.footprint.vertices],
            }
            for o in scene.objects
        ],
    }


def dump_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n")
