import pytest
from numpy.testing import assert_allclose

from sfmnet.errors import DatasetError
from sfmnet.scenarios import (
    Scenario,
    WaypointArea,
    corridor_scenario,
    load_scenario,
    open_scenario,
    resolve_scenario,
    save_scenario,
)


def test_corridor_geometry():
    scen = corridor_scenario()
    assert len(scen.walls) == 8
    assert {a.name for a in scen.waypoint_areas} == {"north", "south", "east", "west"}
    xmin, ymin, xmax, ymax = scen.bounds
    for area in scen.waypoint_areas:
        assert xmin <= area.center[0] <= xmax
        assert ymin <= area.center[1] <= ymax


def test_corridor_center_is_open():
    # no wall comes near the intersection center
    scen = corridor_scenario()
    from sfmnet.geometry import segment_distance

    dists = [segment_distance((0, 0), w.a, w.b) for w in scen.walls]
    assert min(dists) >= 1.0


def test_open_scenario_has_no_walls():
    scen = open_scenario()
    assert scen.walls == ()
    assert scen.waypoint_areas == ()


def test_nearest_area():
    scen = corridor_scenario()
    assert scen.nearest_area((0.2, 4.4)).name == "north"
    assert scen.nearest_area((-3.0, 0.1)).name == "west"


def test_area_contains():
    area = WaypointArea("a", (1.0, 1.0), 0.5)
    assert area.contains((1.2, 1.0))
    assert not area.contains((1.8, 1.0))


def test_waypoint_outside_bounds_rejected():
    with pytest.raises(ValueError):
        Scenario(
            waypoint_areas=(WaypointArea("x", (50.0, 0.0), 1.0),),
            bounds=(-1, -1, 1, 1),
        )


def test_scenario_file_round_trip(tmp_path):
    scen = corridor_scenario()
    path = tmp_path / "corridor.scn"
    save_scenario(scen, path)
    back = load_scenario(path)
    assert len(back.walls) == len(scen.walls)
    for w1, w2 in zip(back.walls, scen.walls):
        assert_allclose(w1.a, w2.a)
        assert_allclose(w1.b, w2.b)
    assert [a.name for a in back.waypoint_areas] == [a.name for a in scen.waypoint_areas]
    assert back.bounds == scen.bounds


def test_scenario_file_errors(tmp_path):
    bad = tmp_path / "bad.scn"
    bad.write_text("wall = 1 2 3\n")
    with pytest.raises(DatasetError) as exc:
        load_scenario(bad)
    assert "1" in str(exc.value)  # names the line

    bad.write_text("mystery = 1\n")
    with pytest.raises(DatasetError):
        load_scenario(bad)


def test_resolve_scenario_builtins():
    assert resolve_scenario("corridor").waypoint_areas
    assert not resolve_scenario("open").walls
