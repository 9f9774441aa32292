"""SVG pictures of plates: one document per plate, 1 user unit = 1 mm."""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

from .engine import Schedule
from .geometry import ConvexPolygon, envelope_hull, scale_plate
from .scene import Scene
from .schedule_file import decimal_str

_PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7")


def _points(poly: ConvexPolygon) -> str:
    return " ".join(f"{decimal_str(v.x)},{decimal_str(v.y)}" for v in poly.vertices)


def _rect(poly: ConvexPolygon, cls: str, style: str) -> str:
    x0, y0, x1, y1 = poly.bounds()
    return (
        f'<rect class="{cls}" x="{decimal_str(x0)}" y="{decimal_str(y0)}" '
        f'width="{decimal_str(x1 - x0)}" height="{decimal_str(y1 - y0)}" {style}/>'
    )


def render_plate_svg(schedule: Schedule, scene: Scene, plate_index: int, timestamp: Optional[str] = None) -> str:
    pa = schedule.plates[plate_index]
    plate = scene.plate
    w, h = decimal_str(plate.width), decimal_str(plate.height)
    objs = {o.id: o for o in scene.objects}
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    if timestamp is not None:
        lines.append(f"<!-- generated {escape(timestamp)} -->")
    lines += [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}mm" height="{h}mm" '
        f'viewBox="0 0 {w} {h}">',
        f"<title>{escape(schedule.strategy)} plate {pa.plate_index}</title>",
        # plate coordinates have y pointing up
        f'<g transform="matrix(1 0 0 -1 0 {h})">',
        _rect(plate.polygon, "plate", 'fill="#f4f4f4" stroke="#333" stroke-width="0.5"'),
        _rect(
            scale_plate(plate, pa.sigma, pa.anchor),
            "sigma-plate",
            'fill="none" stroke="#999" stroke-width="0.4" stroke-dasharray="2,2"',
        ),
    ]
    for k, p in enumerate(pa.placements, start=1):
        obj = objs[p.obj_id]
        color = _PALETTE[(k - 1) % len(_PALETTE)]
        hull = obj.footprint.translated(p.position)
        env = envelope_hull(obj, scene.extruder).translated(p.position)
        n = len(hull)
        cx = sum(v.x for v in hull.vertices) / n
        cy = sum(v.y for v in hull.vertices) / n
        lines += [
            f'<g class="object" id="{escape(p.obj_id)}">',
            f'<polygon class="envelope" points="{_points(env)}" fill="none" stroke="{color}" '
            f'stroke-width="0.3" stroke-dasharray="1,1"/>',
            f'<polygon class="hull" points="{_points(hull)}" fill="{color}" fill-opacity="0.6" '
            f'stroke="{color}" stroke-width="0.4"/>',
            f'<text class="order" x="{decimal_str(cx)}" y="{decimal_str(-cy)}" transform="scale(1,-1)" '
            f'font-size="6" text-anchor="middle" dominant-baseline="central">{k}</text>',
            "</g>",
        ]
    lines += ["</g>", "</svg>"]
    return "\n".join(lines) + "\n"


def render_svg(schedule: Schedule, scene: Scene, timestamp: Optional[str] = None) -> list[str]:
    """One SVG document per plate of ``schedule``."""
    return [render_plate_svg(schedule, scene, k, timestamp) for k in range(len(schedule.plates))]
