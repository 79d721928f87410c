"""Social force model: force evaluation and single-pedestrian integration.

A pedestrian is a point mass pulled toward its goal and pushed away from
static walls:

    m * dv/dt = f_goal + sum_w f_wall

    f_goal = m * (v_des * e_d - v) / tau            (relaxation to desired velocity)
    f_wall = A * exp((r - d_w) / B) * n_w           (exponential repulsion)
           + k1 * g(r - d_w) * n_w                  (compression, contact only)
           - k2 * g(r - d_w) * (v . t_w) * t_w      (sliding friction, contact only)

with g(x) = max(0, x), d_w the distance to the closest wall point, n_w the
unit vector from that point to the pedestrian, and t_w = [-n_w_y, n_w_x].
Contact terms are off by default; the synthetic datasets never enable them.

All functions are pure; states and parameters are immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError
from .fileio import atomic_write_text, fmt_float
from .geometry import closest_point_on_segment
from .validation import as_vec2, check_nonnegative, check_positive

# Below these separations the direction vectors e_d / n_w are undefined;
# failing loudly beats emitting NaN forces.
GOAL_EPS = 1e-9
WALL_EPS = 1e-9

DEFAULT_DT = 0.1
DEFAULT_STOP_RADIUS = 0.2

TRAJECTORY_HEADER = "t,x,y,vx,vy,fx,fy,fox,foy,fwx,fwy"


@dataclass(frozen=True)
class SfmParams:
    """Physical parameters of one pedestrian."""

    mass: float = 70.0            # kg
    tau: float = 0.7              # s, velocity relaxation time
    desired_speed: float = 1.2    # m/s
    radius: float = 0.3           # m
    wall_a: float = 1000.0        # N, repulsion amplitude
    wall_b: float = 0.08          # m, repulsion decay length
    contact_k1: float = 0.0       # N/m, compression (contact terms only)
    contact_k2: float = 0.0       # kg/(m*s), friction (contact terms only)

    def __post_init__(self):
        check_positive(self.mass, "mass")
        check_positive(self.tau, "tau")
        check_nonnegative(self.desired_speed, "desired_speed")
        check_positive(self.radius, "radius")
        check_positive(self.wall_b, "wall_b")


@dataclass(frozen=True)
class PedState:
    """Planar position/velocity at a time instant."""

    position: np.ndarray
    velocity: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec2(self.position, "position"))
        object.__setattr__(self, "velocity", as_vec2(self.velocity, "velocity"))


@dataclass(frozen=True)
class WallSegment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", as_vec2(self.a, "a"))
        object.__setattr__(self, "b", as_vec2(self.b, "b"))
        if np.array_equal(self.a, self.b):
            raise ValueError("wall segment endpoints coincide")


@dataclass(frozen=True)
class GoalSpec:
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_vec2(self.point, "goal point"))


def contact_gate(x: float) -> float:
    """g(x) = max(0, x); switches contact terms on only during overlap."""
    return x if x > 0.0 else 0.0


def attractive_force(state: PedState, params: SfmParams, goal: GoalSpec) -> np.ndarray:
    """Goal-directed relaxation force m * (v_des * e_d - v) / tau."""
    offset = goal.point - state.position
    dist = math.hypot(offset[0], offset[1])
    if dist < GOAL_EPS:
        raise DegenerateGeometryError(
            f"goal point coincides with position (distance {dist:.3e} m)"
        )
    e_d = offset / dist
    return params.mass * (params.desired_speed * e_d - state.velocity) / params.tau


def wall_force(
    state: PedState,
    params: SfmParams,
    walls: list[WallSegment],
    contact_terms: bool = False,
) -> np.ndarray:
    """Sum of per-wall repulsion (and optional contact terms) over all walls."""
    total = np.zeros(2)
    for wall in walls:
        closest = closest_point_on_segment(state.position, wall.a, wall.b)
        offset = state.position - closest
        d_w = math.hypot(offset[0], offset[1])
        if d_w < WALL_EPS:
            raise DegenerateGeometryError(
                f"pedestrian coincides with wall point {closest} (d_w={d_w:.3e} m)"
            )
        n_w = offset / d_w
        overlap = params.radius - d_w
        total += params.wall_a * math.exp(overlap / params.wall_b) * n_w
        if contact_terms:
            g = contact_gate(overlap)
            t_w = np.array([-n_w[1], n_w[0]])
            total += params.contact_k1 * g * n_w
            total -= params.contact_k2 * g * float(state.velocity @ t_w) * t_w
    return total


def total_force(
    state: PedState,
    params: SfmParams,
    goal: GoalSpec,
    walls: list[WallSegment],
    contact_terms: bool = False,
) -> np.ndarray:
    return attractive_force(state, params, goal) + wall_force(
        state, params, walls, contact_terms
    )


# cap on the equivalent wall distance; exp((r - 30)/B) underflows to zero
# for the default decay length, so the capped value carries no force
WALL_CONTEXT_MAX_DISTANCE = 30.0


def wall_context(
    position,
    walls: list[WallSegment],
    params: SfmParams = SfmParams(),
) -> tuple[float, np.ndarray]:
    """Collapse the summed repulsion at ``position`` into (distance, direction).

    Inverts the exponential wall law on the magnitude of the full wall-force
    vector: for a single dominant wall this returns exactly the closest-point
    distance and outward normal; where several segments contribute (corridor
    corners) it returns the equivalent single-wall values whose exponential
    force reproduces the true sum. Far from all walls the distance saturates
    at WALL_CONTEXT_MAX_DISTANCE with an arbitrary fixed direction.
    """
    position = as_vec2(position, "position")
    if walls:
        state = PedState(position=position, velocity=np.zeros(2))
        f = wall_force(state, params, walls, contact_terms=False)
        mag = math.hypot(f[0], f[1])
    else:
        mag = 0.0
    if mag <= 0.0:
        return WALL_CONTEXT_MAX_DISTANCE, np.array([1.0, 0.0])
    d_eff = params.radius - params.wall_b * math.log(mag / params.wall_a)
    d_eff = min(max(d_eff, 1e-6), WALL_CONTEXT_MAX_DISTANCE)
    return d_eff, f / mag


def step(
    state: PedState,
    params: SfmParams,
    goal: GoalSpec,
    walls: list[WallSegment],
    dt: float,
    contact_terms: bool = False,
) -> PedState:
    """One semi-implicit Euler step: v' = v + (f/m) dt, then p' = p + v' dt."""
    check_positive(dt, "dt")
    f = total_force(state, params, goal, walls, contact_terms)
    v_new = state.velocity + (f / params.mass) * dt
    p_new = state.position + v_new * dt
    return PedState(position=p_new, velocity=v_new, time=state.time + dt)


@dataclass
class Trajectory:
    """Timestamped states with the per-step force decomposition.

    The logged forces are evaluated at each stored state (they are the
    training labels), including the final one.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    force_total: np.ndarray
    force_attractive: np.ndarray
    force_wall: np.ndarray
    goal_reached: bool = False

    def __len__(self) -> int:
        return len(self.times)


def simulate(
    initial: PedState,
    params: SfmParams,
    goal: GoalSpec,
    walls: list[WallSegment],
    duration: float,
    dt: float = DEFAULT_DT,
    stop_radius: float = DEFAULT_STOP_RADIUS,
    contact_terms: bool = False,
) -> Trajectory:
    """Integrate for ``duration`` seconds, stopping early near the goal.

    Returns floor(duration/dt)+1 states unless the pedestrian comes within
    ``stop_radius`` of the goal first (``stop_radius=0`` disables early
    stopping). Numeric failures abort with the offending step index.
    """
    check_positive(duration, "duration")
    check_positive(dt, "dt")
    n_steps = int(math.floor(duration / dt + 1e-9))

    states = [initial]
    forces_a = []
    forces_w = []
    goal_reached = False

    def _log_forces(s: PedState, index: int):
        try:
            fa = attractive_force(s, params, goal)
            fw = wall_force(s, params, walls, contact_terms)
        except DegenerateGeometryError as exc:
            raise DegenerateGeometryError(f"step {index}: {exc}") from exc
        forces_a.append(fa)
        forces_w.append(fw)
        return fa + fw

    for k in range(n_steps):
        f = _log_forces(states[-1], k)
        prev = states[-1]
        v_new = prev.velocity + (f / params.mass) * dt
        p_new = prev.position + v_new * dt
        states.append(PedState(position=p_new, velocity=v_new, time=prev.time + dt))
        if stop_radius > 0.0:
            gap = math.hypot(*(goal.point - p_new))
            if gap <= stop_radius:
                goal_reached = True
                break
    _log_forces(states[-1], len(states) - 1)

    fa = np.array(forces_a)
    fw = np.array(forces_w)
    return Trajectory(
        times=np.array([s.time for s in states]),
        positions=np.array([s.position for s in states]),
        velocities=np.array([s.velocity for s in states]),
        force_total=fa + fw,
        force_attractive=fa,
        force_wall=fw,
        goal_reached=goal_reached,
    )


def write_trajectory_csv(trajectory: Trajectory, path) -> None:
    """CSV with header t,x,y,vx,vy,fx,fy,fox,foy,fwx,fwy at 9 significant digits."""
    lines = [TRAJECTORY_HEADER]
    for i in range(len(trajectory)):
        row = [
            trajectory.times[i],
            trajectory.positions[i, 0],
            trajectory.positions[i, 1],
            trajectory.velocities[i, 0],
            trajectory.velocities[i, 1],
            trajectory.force_total[i, 0],
            trajectory.force_total[i, 1],
            trajectory.force_attractive[i, 0],
            trajectory.force_attractive[i, 1],
            trajectory.force_wall[i, 0],
            trajectory.force_wall[i, 1],
        ]
        lines.append(",".join(fmt_float(v, "%.9g") for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trajectory_csv(path) -> Trajectory:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectory header: {header!r}")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    data = np.array(rows)
    return Trajectory(
        times=data[:, 0],
        positions=data[:, 1:3],
        velocities=data[:, 3:5],
        force_total=data[:, 5:7],
        force_attractive=data[:, 7:9],
        force_wall=data[:, 9:11],
    )
