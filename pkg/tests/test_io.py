import json
import xml.etree.ElementTree as ET
from decimal import Decimal
from fractions import Fraction as F

import pytest

from seqpack.engine import solve_cegar_seq
from seqpack.geometry import ConvexPolygon, ExtruderProfile, Plate, PrintObject
from seqpack.scene import DEFAULT_EXTRUDER_SIDE, Scene, SceneError, dump_scene, load_scene, loads_scene
from seqpack.schedule_file import (
    ScheduleFileError,
    decimal_str,
    dumps_schedule,
    exact_str,
    load_schedule,
    schedule_from_dict,
    schedule_to_dict,
    write_schedule,
)
from seqpack.strategy import CompositeStrategy, OrderingKind, Tactic
from seqpack.svg import render_plate_svg, render_svg
from seqpack.verify import verify_schedule

SVG = "{http://www.w3.org/2000/svg}"
CENTER = CompositeStrategy.make(Tactic.CENTER, OrderingKind.INPUT)


def _scene(objects, extruder=None, plate=(200, 200)):
    d = {"plate": {"width": plate[0], "height": plate[1]}, "objects": objects}
    if extruder is not None:
        d["extruder"] = {"footprint": extruder}
    return json.dumps(d)


def test_minimal_scene():
    sc = loads_scene(_scene([{"id": "a", "cuboid": {"length": 10, "width": 10, "height": 10}}], [[-5, -5], [5, -5], [5, 5], [-5, 5]]))
    assert sc.plate == Plate(200, 200)
    (obj,) = sc.objects
    assert obj.footprint == ConvexPolygon.rectangle(0, 0, 10, 10) and obj.height == 10
    assert sc.extruder == ExtruderProfile.square(10)


def test_default_extruder():
    sc = loads_scene(_scene([{"id": "a", "cuboid": {"length": 1, "width": 1, "height": 1}}]))
    assert sc.extruder == ExtruderProfile.square(DEFAULT_EXTRUDER_SIDE)


def test_point_extruder():
    sc = loads_scene(_scene([{"id": "a", "cuboid": {"length": 1, "width": 1, "height": 1}}], [[0, 0]]))
    assert sc.extruder.is_point


def test_decimals_are_exact():
    text = _scene([{"id": "p", "height": "0.3", "footprint": [[0.1, 0], [1, 0.1], [0, 1]]}])
    (obj,) = loads_scene(text).objects
    assert F(1, 10) in {v.x for v in obj.footprint.vertices}
    assert obj.height == F(3, 10)
    sc = loads_scene(_scene([{"id": "q", "height": "1/3", "footprint": [[0, 0], ["2/3", 0], [0, 1]]}]))
    assert sc.objects[0].height == F(1, 3)


def test_footprint_is_hulled():
    pts = [[0, 0], [4, 0], [4, 4], [0, 4], [2, 2], [2, 0]]
    (obj,) = loads_scene(_scene([{"id": "h", "height": 1, "footprint": pts}])).objects
    assert len(obj.footprint) == 4


@pytest.mark.parametrize(
    "objects, path",
    [
        ([{"id": "a", "cuboid": {"length": 1, "width": 1, "height": 1}}] * 2, "objects[1].id"),
        ([{"id": "a", "height": 1, "footprint": [[0, 0], [1, 1], [2, 2]]}], "objects[0].footprint"),
        ([{"id": "a", "height": 1, "footprint": [[0, 0], [1, 0]]}], "objects[0].footprint"),
        ([{"id": "a", "height": 0, "footprint": [[0, 0], [1, 0], [0, 1]]}], "objects[0].height"),
        ([{"id": "a", "cuboid": {"length": -1, "width": 1, "height": 1}}], "objects[0].cuboid.length"),
        ([{"id": "a"}], "objects[0]"),
        ([{"id": "", "cuboid": {"length": 1, "width": 1, "height": 1}}], "objects[0].id"),
        ([{"id": "a", "height": "abc", "footprint": [[0, 0], [1, 0], [0, 1]]}], "objects[0].height"),
        ([], "objects"),
    ],
)
def test_scene_errors_name_the_field(objects, path):
    with pytest.raises(SceneError) as info:
        loads_scene(_scene(objects))
    assert info.value.path == path
    if path == "objects[1].id":
        assert "'a'" in str(info.value)


def test_scene_level_errors():
    with pytest.raises(SceneError):
        loads_scene("{not json")
    with pytest.raises(SceneError):
        loads_scene(json.dumps({"objects": []}))
    with pytest.raises(SceneError) as info:
        loads_scene(_scene([{"id": "a", "cuboid": {"length": 1, "width": 1, "height": 1}}], [[1, 1], [2, 1], [2, 2]]))
    assert info.value.path == "extruder.footprint"
    with pytest.raises(SceneError):
        load_scene("/nonexistent/scene.json")


def test_scene_round_trip(tmp_path):
    text = _scene(
        [
            {"id": "a", "cuboid": {"length": "10.5", "width": 3, "height": 2}},
            {"id": "b", "height": "1/3", "footprint": [[0, 0], [5, 1], [2, 7]]},
        ],
        [[-3, -2], [4, -2], [0, 5]],
    )
    sc = loads_scene(text)
    dump_scene(sc, tmp_path / "s.json")
    assert load_scene(tmp_path / "s.json") == sc


def test_decimal_str():
    assert decimal_str(F(1, 3)) == "0.333333333333"
    assert decimal_str(F(2, 3)) == "0.666666666667"
    assert decimal_str(F(200)) == "200"
    assert decimal_str(F(-5, 2)) == "-2.5"
    assert decimal_str(F(0)) == "0"
    assert decimal_str(F(1, 1024)) == "0.0009765625"
    assert exact_str(F(-3, 7)) == "-3/7" and exact_str(F(4)) == "4"


@pytest.fixture(scope="module")
def solved():
    objs = [
        PrintObject.cuboid("a", 40, 30, 20),
        PrintObject.cuboid("b", F(51, 2), 25, 50),
        PrintObject(
            "c", ConvexPolygon(((0, 0), (30, 0), (15, 20))), 10
        ),
        PrintObject.cuboid("d", 60, 10, 5),
        PrintObject.cuboid("e", 12, 12, 70),
    ]
    scene = Scene(Plate(200, 200), ExtruderProfile.square(20), tuple(objs))
    return scene, solve_cegar_seq(scene.plate, objs, scene.extruder, CENTER)


def test_schedule_file_shape(solved):
    scene, sched = solved
    d = schedule_to_dict(sched)
    assert d["strategy"] == "Center/Height-Input"
    assert d["stats"]["plates_used"] == sched.plates_used
    assert d["stats"]["objects_per_plate"] == sched.objects_per_plate
    assert d["stats"]["wall_time_ms"] is None
    assert isinstance(schedule_to_dict(sched, record_timing=True)["stats"]["wall_time_ms"], int)
    for p in d["plates"]:
        assert sorted(e["order"] for e in p["placements"]) == list(range(1, len(p["placements"]) + 1))
        assert [e["order"] for e in p["placements"]] == sorted(e["order"] for e in p["placements"])
        for e in p["placements"]:
            assert F(e["x_exact"]) - F(Decimal(e["x"])) < F(1, 10**9)


def test_schedule_round_trip_verifies(solved, tmp_path):
    scene, sched = solved
    path = tmp_path / "s.json"
    write_schedule(sched, path)
    back = load_schedule(path)
    assert verify_schedule(back, scene.objects, scene.extruder, scene.plate) == []
    assert back.object_ids() == sched.object_ids()
    for a, b in zip(sched.plates, back.plates):
        assert a.sigma == b.sigma and a.anchor == b.anchor
        assert [(p.obj_id, p.x, p.y) for p in a.placements] == [(p.obj_id, p.x, p.y) for p in b.placements]
    assert dumps_schedule(back) == dumps_schedule(sched)


def test_schedule_without_groups(solved):
    scene, sched = solved
    d = schedule_to_dict(sched)
    for p in d["plates"]:
        del p["groups"]
        p["sigma_exact"] = "1"
        for e in p["placements"]:
            del e["x_exact"], e["y_exact"]
    back = schedule_from_dict(d)
    assert back.plates_used == sched.plates_used


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d["plates"][0]["placements"][0].update(order=7),
        lambda d: d["plates"][0]["placements"][0].update(order="1"),
        lambda d: d["plates"][0]["placements"][0].pop("id"),
        lambda d: d["plates"][0]["placements"][0].update(x_exact="one"),
        lambda d: d.pop("plates"),
        lambda d: d["plates"][0]["groups"][0]["ids"].pop(),
    ],
)
def test_bad_schedule_files(solved, mutate):
    d = schedule_to_dict(solved[1])
    mutate(d)
    with pytest.raises(ScheduleFileError):
        schedule_from_dict(d)


def test_load_schedule_errors(tmp_path):
    with pytest.raises(ScheduleFileError):
        load_schedule(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("[1,")
    with pytest.raises(ScheduleFileError):
        load_schedule(tmp_path / "bad.json")


# -- SVG ------------------------------------------------------------------------


def _single_scene():
    obj = PrintObject.cuboid("solo", 10, 10, 10)
    return Scene(Plate(200, 200), ExtruderProfile.square(20), (obj,))


def test_svg_single_object_structure():
    scene = _single_scene()
    sched = solve_cegar_seq(scene.plate, list(scene.objects), scene.extruder, CENTER)
    (doc,) = render_svg(sched, scene)
    root = ET.fromstring(doc)
    assert root.get("viewBox") == "0 0 200 200" and root.get("width") == "200mm"
    assert len(root.findall(f".//{SVG}rect")) == 2
    assert len(root.findall(f".//{SVG}polygon[@class='hull']")) == 1
    assert [t.text for t in root.findall(f".//{SVG}text")] == ["1"]
    assert "<!--" not in doc
    assert "<!-- generated 2024-01-01 -->" in render_plate_svg(sched, scene, 0, "2024-01-01")


def test_svg_labels_follow_print_order(solved):
    scene, sched = solved
    for k, doc in enumerate(render_svg(sched, scene)):
        root = ET.fromstring(doc)
        groups = root.findall(f".//{SVG}g[@class='object']")
        ids = [g.get("id") for g in groups]
        assert ids == [p.obj_id for p in sched.plates[k].placements]
        assert [g.find(f"{SVG}text").text for g in groups] == [str(i) for i in range(1, len(groups) + 1)]


def test_svg_coordinates_parse_back(solved):
    scene, sched = solved
    objs = {o.id: o for o in scene.objects}
    for k, doc in enumerate(render_svg(sched, scene)):
        root = ET.fromstring(doc)
        for g in root.findall(f".//{SVG}g[@class='object']"):
            p = next(p for p in sched.plates[k].placements if p.obj_id == g.get("id"))
            pts = [tuple(F(Decimal(c)) for c in pair.split(",")) for pair in g.find(f"{SVG}polygon[@class='hull']").get("points").split()]
            expect = objs[p.obj_id].footprint.translated(p.position).vertices
            assert len(pts) == len(expect)
            for (x, y), v in zip(pts, expect):
                assert F(Decimal(decimal_str(v.x))) == x and F(Decimal(decimal_str(v.y))) == y
                # 12 significant digits on coordinates below 1000
                assert abs(x - v.x) <= F(1, 10**8) and abs(y - v.y) <= F(1, 10**8)
