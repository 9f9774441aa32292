from fractions import Fraction as F

from seqpack.engine import Placement, PlacementGroup, PlateAssignment, Schedule
from seqpack.geometry import ExtruderProfile, Plate, Point2, PrintObject
from seqpack.verify import COLLISION, COVERAGE, ORDER, PLATE, TRAVERSABILITY, verify_schedule

P = Plate(200, 200)
EXT = ExtruderProfile.square(10)


def _schedule(*placements, sigma=F(1), anchor=(100, 100)):
    group = PlacementGroup([Placement(i, F(x), F(y), F(t)) for i, x, y, t in placements], sigma)
    return Schedule([PlateAssignment(0, [group], Point2(F(anchor[0]), F(anchor[1])))], "hand")


def _kinds(violations):
    return sorted({(v.kind, v.objects) for v in violations})


def test_clean_schedule():
    objs = [PrintObject.cuboid("a", 20, 20, 10), PrintObject.cuboid("b", 20, 20, 10)]
    s = _schedule(("a", 0, 0, 0), ("b", 100, 100, 1))
    assert verify_schedule(s, objs, EXT, P) == []


def test_coincident_objects():
    objs = [PrintObject.cuboid("a", 20, 20, 10), PrintObject.cuboid("b", 20, 20, 10)]
    s = _schedule(("a", 50, 50, 0), ("b", 50, 50, 1))
    kinds = _kinds(verify_schedule(s, objs, EXT, P))
    assert (COLLISION, ("a", "b")) in kinds
    assert (TRAVERSABILITY, ("a", "b")) in kinds


def test_protruding_object_names_edge():
    objs = [PrintObject.cuboid("a", 20, 20, 10)]
    s = _schedule(("a", 190, -5, 0))
    found = verify_schedule(s, objs, EXT, P)
    assert {v.kind for v in found} == {PLATE}
    details = " ".join(v.detail for v in found)
    assert "right" in details and "bottom" in details
    assert all(v.objects == ("a",) for v in found)


def test_sigma_plate_is_checked():
    objs = [PrintObject.cuboid("a", 20, 20, 10)]
    # inside the plate but outside the half-size plate around the center
    s = _schedule(("a", 10, 10, 0), sigma=F(1, 2))
    assert [v.kind for v in verify_schedule(s, objs, EXT, P)] == [PLATE, PLATE]


def test_later_envelope_over_earlier_hull():
    objs = [PrintObject.cuboid("a", 20, 20, 10), PrintObject.cuboid("b", 20, 20, 30)]
    # 3 mm gap: hulls apart, but the later object's 10 mm head sweeps over the earlier one
    s = _schedule(("a", 0, 0, 0), ("b", 23, 0, 1))
    assert _kinds(verify_schedule(s, objs, EXT, P)) == [(COLLISION, ("a", "b"))]
    # printed the other way round, the tall one first: its envelope is irrelevant
    s = _schedule(("b", 23, 0, 0), ("a", 0, 0, 1))
    assert _kinds(verify_schedule(s, objs, EXT, P)) == [(COLLISION, ("b", "a"))]
    s = _schedule(("a", 0, 0, 0), ("b", 25, 0, 1))
    assert verify_schedule(s, objs, EXT, P) == []


def test_touching_is_allowed():
    objs = [PrintObject.cuboid("a", 20, 20, 10), PrintObject.cuboid("b", 20, 20, 10)]
    s = _schedule(("a", 0, 0, 0), ("b", 25, 0, 1))
    assert verify_schedule(s, objs, EXT, P) == []


def test_coverage_and_order():
    objs = [PrintObject.cuboid("a", 20, 20, 10), PrintObject.cuboid("b", 20, 20, 10)]
    s = _schedule(("a", 0, 0, 0), ("a", 100, 100, 0))
    kinds = {v.kind for v in verify_schedule(s, objs, EXT, P)}
    assert COVERAGE in kinds and ORDER in kinds
    s = _schedule(("a", 0, 0, 0), ("zz", 100, 100, 1))
    assert any(v.kind == COVERAGE for v in verify_schedule(s, objs, EXT, P))
