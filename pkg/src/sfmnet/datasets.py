"""Synthetic dataset generation and the dataset CSV format.

Two generators feed the two networks:

* open space: per-simulation physical parameters drawn from the training
  ranges, start 8-10 m from a random goal, agent launched at its desired
  velocity toward the goal.
* intersecting corridors: start and goal drawn from distinct waypoint
  areas; physical parameters are held fixed so the total-force labels stay
  a function of the observable window (see the generation config record).

Trajectories are sliced into overlapping windows (stride 1); the label of a
window is the logged total force at its final step. The 70/30 train/val
split happens by trajectory before any shuffling, so no window of a
validation trajectory can leak into training.

Per-simulation RNG streams are derived from (seed, sim_index), which makes
parallel and serial generation produce identical datasets.

Dataset CSV columns::

    traj_id,split,t,px0..px{n-1},py0..py{n-1},edx,edy,dw,nwx,nwy,fx,fy

The aux columns (edx..nwy) are empty for open-space datasets. Floats are
written with 17 significant digits so labels survive a round trip exactly.
"""

from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetError, SfmNetError
from .fileio import atomic_write_text, dumps_json17, fmt_float
from .forces import GoalSpec, PedState, SfmParams, Trajectory, simulate, wall_context
from .networks import TrajectoryWindow
from .scenarios import Scenario, corridor_scenario

logger = logging.getLogger(__name__)

# training ranges for the randomized physical parameters
MASS_RANGE = (50.0, 90.0)       # kg
TAU_RANGE = (0.5, 0.9)          # s
SPEED_RANGE = (0.5, 3.0)        # m/s
WALL_A = 1000.0                 # N
WALL_B = 0.08                   # m
PED_RADIUS = 0.3                # m

START_DISTANCE_RANGE = (8.0, 10.0)  # m from the goal, open scenario

# corridor generation holds the dynamics fixed; with a randomized mass the
# force labels would carry variance no window-conditioned model can remove
CORRIDOR_PARAMS = SfmParams(
    mass=70.0, tau=0.7, desired_speed=1.2,
    radius=PED_RADIUS, wall_a=WALL_A, wall_b=WALL_B,
)

DEFAULT_WINDOW = 10
DEFAULT_DURATION = 20.0
DEFAULT_DT = 0.1
TRAIN_FRACTION = 0.7


def sample_params(rng: np.random.Generator) -> SfmParams:
    """Draw one pedestrian's parameters from the training ranges."""
    mass = rng.uniform(*MASS_RANGE)
    tau = rng.uniform(*TAU_RANGE)
    speed = rng.uniform(*SPEED_RANGE)
    return SfmParams(
        mass=mass, tau=tau, desired_speed=speed,
        radius=PED_RADIUS, wall_a=WALL_A, wall_b=WALL_B,
    )


@dataclass(frozen=True)
class SampleRecord:
    """One training sample: a window, optional wall/goal context, force label."""

    traj_id: int
    t: float
    window: TrajectoryWindow
    label_force: np.ndarray
    e_d: np.ndarray | None = None
    d_w: float | None = None
    n_w: np.ndarray | None = None

    @property
    def has_aux(self) -> bool:
        return self.e_d is not None


@dataclass(frozen=True)
class GeneratedTrajectory:
    """A simulated trajectory plus everything needed to replay its labels."""

    traj_id: int
    trajectory: Trajectory
    params: SfmParams
    goal: np.ndarray


@dataclass
class DatasetSplit:
    train: list[SampleRecord]
    val: list[SampleRecord]
    seed: int
    n: int
    dt: float
    provenance: dict
    trajectories: list[GeneratedTrajectory] = field(default_factory=list)

    @property
    def config_digest(self) -> str:
        return hashlib.sha256(dumps_json17(self.provenance).encode()).hexdigest()

    def train_trajectory_ids(self) -> set[int]:
        return {s.traj_id for s in self.train}

    def val_trajectory_ids(self) -> set[int]:
        return {s.traj_id for s in self.val}


def make_windows(trajectory: Trajectory, n: int, aux_fn=None, traj_id: int = 0, dt: float = DEFAULT_DT):
    """Slice a trajectory into stride-1 windows of n positions.

    The label of window [k, k+n-1] is the logged total force at step k+n-1;
    ``aux_fn(step_index)`` may supply (e_d, d_w, n_w) evaluated there.
    Trajectories shorter than n yield an empty list.
    """
    total = len(trajectory)
    if total < n:
        return []
    samples = []
    for k in range(total - n + 1):
        end = k + n - 1
        window = TrajectoryWindow(trajectory.positions[k:k + n].copy(), dt)
        aux = aux_fn(end) if aux_fn is not None else (None, None, None)
        samples.append(
            SampleRecord(
                traj_id=traj_id,
                t=float(trajectory.times[end]),
                window=window,
                label_force=trajectory.force_total[end].copy(),
                e_d=aux[0],
                d_w=aux[1],
                n_w=aux[2],
            )
        )
    return samples


def _drop_last_state(trajectory: Trajectory) -> Trajectory:
    return Trajectory(
        times=trajectory.times[:-1],
        positions=trajectory.positions[:-1],
        velocities=trajectory.velocities[:-1],
        force_total=trajectory.force_total[:-1],
        force_attractive=trajectory.force_attractive[:-1],
        force_wall=trajectory.force_wall[:-1],
        goal_reached=trajectory.goal_reached,
    )


def _sim_rng(seed: int, sim_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, sim_index])


def simulate_open_run(seed: int, sim_index: int, duration: float, dt: float,
                      stop_radius: float = 0.2):
    """One seeded open-space run: random parameters, start 8-10 m from the goal."""
    rng = _sim_rng(seed, sim_index)
    params = sample_params(rng)
    goal = rng.uniform(-2.0, 2.0, 2)
    angle = rng.uniform(0.0, 2.0 * math.pi)
    dist = rng.uniform(*START_DISTANCE_RANGE)
    start = goal + dist * np.array([math.cos(angle), math.sin(angle)])
    heading = (goal - start) / dist
    initial = PedState(position=start, velocity=params.desired_speed * heading)
    trajectory = simulate(
        initial, params, GoalSpec(goal), [], duration=duration, dt=dt,
        stop_radius=stop_radius,
    )
    return trajectory, params, goal


def simulate_corridor_run(seed: int, sim_index: int, duration: float, dt: float,
                          scenario: Scenario, stop_radius: float = 0.2):
    """One seeded corridor run between two distinct waypoint areas."""
    rng = _sim_rng(seed, sim_index)
    areas = scenario.waypoint_areas
    start_idx = int(rng.integers(len(areas)))
    goal_idx = start_idx
    while goal_idx == start_idx:
        goal_idx = int(rng.integers(len(areas)))

    def point_in(area):
        r = area.radius * math.sqrt(rng.uniform())
        a = rng.uniform(0.0, 2.0 * math.pi)
        return area.center + r * np.array([math.cos(a), math.sin(a)])

    start = point_in(areas[start_idx])
    goal = point_in(areas[goal_idx])
    offset = goal - start
    heading = offset / math.hypot(*offset)
    params = CORRIDOR_PARAMS
    initial = PedState(position=start, velocity=params.desired_speed * heading)
    trajectory = simulate(
        initial, params, GoalSpec(goal), list(scenario.walls), duration=duration,
        dt=dt, stop_radius=stop_radius,
    )
    return trajectory, params, goal


def _generate(kind: str, count: int, seed: int, duration: float, dt: float,
              n: int, scenario: Scenario | None, jobs: int) -> DatasetSplit:
    if count < 10:
        raise ValueError("count must be at least 10")
    if kind == "corridor" and scenario is None:
        scenario = corridor_scenario()

    def run_one(i: int):
        try:
            if kind == "open":
                return simulate_open_run(seed, i, duration, dt)
            return simulate_corridor_run(seed, i, duration, dt, scenario)
        except SfmNetError as exc:
            logger.warning("simulation %d failed and was skipped: %s", i, exc)
            return None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, range(count)))
    else:
        results = [run_one(i) for i in range(count)]

    generated = []
    for i, res in enumerate(results):
        if res is None:
            continue
        trajectory, params, goal = res
        generated.append(GeneratedTrajectory(i, trajectory, params, goal))

    walls = list(scenario.walls) if scenario is not None else []

    def slice_one(g: GeneratedTrajectory):
        trajectory = g.trajectory
        if trajectory.goal_reached:
            # the arrival state sits inside the stop radius where the goal
            # direction flips; its force is a termination artifact, not a label
            trajectory = _drop_last_state(trajectory)
        aux_fn = None
        if kind == "corridor":
            def aux_fn(end, g=g, trajectory=trajectory):
                p = trajectory.positions[end]
                offset = g.goal - p
                dist = math.hypot(*offset)
                e_d = offset / dist
                d_w, n_w = wall_context(p, walls, g.params)
                return e_d, d_w, n_w
        return make_windows(trajectory, n, aux_fn, traj_id=g.traj_id, dt=dt)

    n_train = int(math.floor(TRAIN_FRACTION * len(generated)))
    train: list[SampleRecord] = []
    val: list[SampleRecord] = []
    for pos, g in enumerate(generated):
        bucket = train if pos < n_train else val
        bucket.extend(slice_one(g))

    provenance = {
        "generator": kind,
        "count": count,
        "seed": seed,
        "duration": duration,
        "dt": dt,
        "window": n,
        "train_fraction": TRAIN_FRACTION,
        "skipped": [i for i, r in enumerate(results) if r is None],
        "params_policy": (
            "sampled(mass 50-90, tau 0.5-0.9, speed 0.5-3)" if kind == "open"
            else "fixed(mass 70, tau 0.7, speed 1.2)"
        ),
    }
    return DatasetSplit(
        train=train, val=val, seed=seed, n=n, dt=dt,
        provenance=provenance, trajectories=generated,
    )


def gen_open_dataset(count: int, seed: int, *, duration: float = DEFAULT_DURATION,
                     dt: float = DEFAULT_DT, n: int = DEFAULT_WINDOW, jobs: int = 1) -> DatasetSplit:
    """Open-space dataset for the goal-force network."""
    return _generate("open", count, seed, duration, dt, n, None, jobs)


def gen_corridor_dataset(count: int, seed: int, *, scenario: Scenario | None = None,
                         duration: float = DEFAULT_DURATION, dt: float = DEFAULT_DT,
                         n: int = DEFAULT_WINDOW, jobs: int = 1) -> DatasetSplit:
    """Intersecting-corridors dataset for the walled network."""
    return _generate("corridor", count, seed, duration, dt, n, scenario, jobs)


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------


def dataset_header(n: int) -> str:
    cols = ["traj_id", "split", "t"]
    cols += [f"px{i}" for i in range(n)]
    cols += [f"py{i}" for i in range(n)]
    cols += ["edx", "edy", "dw", "nwx", "nwy", "fx", "fy"]
    return ",".join(cols)


def write_dataset_csv(dataset: DatasetSplit, path) -> None:
    lines = [dataset_header(dataset.n)]

    def emit(sample: SampleRecord, split: str):
        vals = [str(sample.traj_id), split, fmt_float(sample.t)]
        vals += [fmt_float(x) for x in sample.window.positions[:, 0]]
        vals += [fmt_float(y) for y in sample.window.positions[:, 1]]
        if sample.has_aux:
            vals += [fmt_float(v) for v in (*sample.e_d, sample.d_w, *sample.n_w)]
        else:
            vals += ["", "", "", "", ""]
        vals += [fmt_float(v) for v in sample.label_force]
        lines.append(",".join(vals))

    for s in dataset.train:
        emit(s, "train")
    for s in dataset.val:
        emit(s, "val")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_dataset_csv(path, dt: float = DEFAULT_DT) -> DatasetSplit:
    """Load a dataset CSV; ``dt`` is the window sampling time (not stored)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            rows = [line.rstrip("\n") for line in fh if line.strip()]
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from exc

    cols = header.split(",")
    if len(cols) < 10 or cols[:3] != ["traj_id", "split", "t"]:
        raise DatasetError(f"{path}: unexpected dataset header")
    n = (len(cols) - 10) // 2
    if dataset_header(n) != header:
        raise DatasetError(f"{path}: header does not match the dataset layout")

    train: list[SampleRecord] = []
    val: list[SampleRecord] = []
    for lineno, row in enumerate(rows, start=2):
        parts = row.split(",")
        if len(parts) != len(cols):
            raise DatasetError(f"{path}:{lineno}: expected {len(cols)} fields")
        try:
            traj_id = int(parts[0])
            split = parts[1]
            t = float(parts[2])
            px = [float(v) for v in parts[3:3 + n]]
            py = [float(v) for v in parts[3 + n:3 + 2 * n]]
            aux = parts[3 + 2 * n:8 + 2 * n]
            label = np.array([float(parts[-2]), float(parts[-1])])
        except ValueError as exc:
            raise DatasetError(f"{path}:{lineno}: {exc}") from exc
        if split not in ("train", "val"):
            raise DatasetError(f"{path}:{lineno}: bad split {split!r}")
        window = TrajectoryWindow(np.column_stack([px, py]), dt)
        if any(aux):
            e_d = np.array([float(aux[0]), float(aux[1])])
            d_w = float(aux[2])
            n_w = np.array([float(aux[3]), float(aux[4])])
        else:
            e_d, d_w, n_w = None, None, None
        sample = SampleRecord(
            traj_id=traj_id, t=t, window=window, label_force=label,
            e_d=e_d, d_w=d_w, n_w=n_w,
        )
        (train if split == "train" else val).append(sample)

    return DatasetSplit(
        train=train, val=val, seed=-1, n=n, dt=dt,
        provenance={"loaded_from": str(path)},
    )
