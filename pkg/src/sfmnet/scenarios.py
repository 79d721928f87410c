"""Static scenarios: wall layouts, waypoint areas, and the scenario file format.

Scenario files are plain key-value text, one entry per line::

    # comment
    bounds = xmin ymin xmax ymax
    wall = ax ay bx by
    waypoint = name cx cy radius

Keys may repeat (one line per wall/waypoint). Unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DatasetError
from .fileio import atomic_write_text, fmt_float
from .forces import WallSegment
from .validation import as_vec2, check_positive


@dataclass(frozen=True)
class WaypointArea:
    """A named disc marking a candidate start/goal region."""

    name: str
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec2(self.center, "waypoint center"))
        check_positive(self.radius, "waypoint radius")

    def contains(self, point) -> bool:
        point = np.asarray(point, dtype=np.float64)
        return math.hypot(*(point - self.center)) <= self.radius


@dataclass(frozen=True)
class Scenario:
    walls: tuple[WallSegment, ...] = ()
    waypoint_areas: tuple[WaypointArea, ...] = ()
    bounds: tuple[float, float, float, float] = (-12.0, -12.0, 12.0, 12.0)

    def __post_init__(self):
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmin < xmax and ymin < ymax):
            raise ValueError(f"bounds are not a valid rectangle: {self.bounds}")
        for area in self.waypoint_areas:
            cx, cy = area.center
            if not (xmin <= cx <= xmax and ymin <= cy <= ymax):
                raise ValueError(f"waypoint {area.name!r} lies outside bounds")

    def wall_pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(w.a, w.b) for w in self.walls]

    def area_by_name(self, name: str) -> WaypointArea:
        for area in self.waypoint_areas:
            if area.name == name:
                return area
        raise KeyError(name)

    def nearest_area(self, point) -> WaypointArea:
        if not self.waypoint_areas:
            raise ValueError("scenario has no waypoint areas")
        point = np.asarray(point, dtype=np.float64)
        return min(
            self.waypoint_areas,
            key=lambda a: math.hypot(*(point - a.center)),
        )


def open_scenario(half_extent: float = 12.0) -> Scenario:
    """Unbounded free space (no walls, no waypoints)."""
    return Scenario(bounds=(-half_extent, -half_extent, half_extent, half_extent))


def corridor_scenario(
    width: float = 2.0,
    arm_length: float = 5.0,
    area_radius: float = 0.5,
) -> Scenario:
    """Two perpendicular corridors crossing at the origin.

    Four waypoint areas sit at the arm ends; the walls leave the central
    intersection open. Arm ends are open (they are the exits). Arms much
    longer than ~6 m trap the dynamics in the inside-corner pocket (the
    goal pull cannot clear the corner), so the default stays below that.
    """
    h = width / 2.0
    L = arm_length
    walls = (
        # vertical corridor (along y), left and right walls split at the crossing
        WallSegment((-h, h), (-h, L)),
        WallSegment((-h, -L), (-h, -h)),
        WallSegment((h, h), (h, L)),
        WallSegment((h, -L), (h, -h)),
        # horizontal corridor (along x), bottom and top walls
        WallSegment((h, h), (L, h)),
        WallSegment((-L, h), (-h, h)),
        WallSegment((h, -h), (L, -h)),
        WallSegment((-L, -h), (-h, -h)),
    )
    waypoints = (
        WaypointArea("north", (0.0, L), area_radius),
        WaypointArea("south", (0.0, -L), area_radius),
        WaypointArea("east", (L, 0.0), area_radius),
        WaypointArea("west", (-L, 0.0), area_radius),
    )
    margin = area_radius
    return Scenario(
        walls=walls,
        waypoint_areas=waypoints,
        bounds=(-L - margin, -L - margin, L + margin, L + margin),
    )


BUILTIN_SCENARIOS = {
    "open": open_scenario,
    "corridor": corridor_scenario,
}


def resolve_scenario(name_or_path) -> Scenario:
    """Look up a builtin scenario by name, or load a scenario file."""
    key = str(name_or_path)
    if key in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[key]()
    return load_scenario(name_or_path)


def save_scenario(scenario: Scenario, path) -> None:
    lines = ["# sfmnet scenario"]
    lines.append("bounds = " + " ".join(fmt_float(v) for v in scenario.bounds))
    for wall in scenario.walls:
        coords = (*wall.a, *wall.b)
        lines.append("wall = " + " ".join(fmt_float(v) for v in coords))
    for area in scenario.waypoint_areas:
        lines.append(
            f"waypoint = {area.name} "
            + " ".join(fmt_float(v) for v in (*area.center, area.radius))
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_scenario(path) -> Scenario:
    walls: list[WallSegment] = []
    waypoints: list[WaypointArea] = []
    bounds = None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.readlines()
    except OSError as exc:
        raise DatasetError(f"cannot read scenario file {path}: {exc}") from exc

    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DatasetError(f"{path}:{lineno}: expected 'key = values'")
        key, _, rest = line.partition("=")
        key = key.strip()
        parts = rest.split()
        try:
            if key == "bounds":
                bounds = tuple(float(v) for v in parts)
                if len(bounds) != 4:
                    raise ValueError("bounds needs 4 numbers")
            elif key == "wall":
                vals = [float(v) for v in parts]
                if len(vals) != 4:
                    raise ValueError("wall needs 4 numbers")
                walls.append(WallSegment(vals[:2], vals[2:]))
            elif key == "waypoint":
                if len(parts) != 4:
                    raise ValueError("waypoint needs: name cx cy radius")
                waypoints.append(
                    WaypointArea(parts[0], [float(parts[1]), float(parts[2])], float(parts[3]))
                )
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise DatasetError(f"{path}:{lineno}: {exc}") from exc

    kwargs = {"walls": tuple(walls), "waypoint_areas": tuple(waypoints)}
    if bounds is not None:
        kwargs["bounds"] = bounds
    try:
        return Scenario(**kwargs)
    except ValueError as exc:
        raise DatasetError(f"{path}: {exc}") from exc
