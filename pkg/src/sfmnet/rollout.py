"""Open-loop trajectory rollout from a trained force network.

Each step infers a force from the current window, integrates it with the
same semi-implicit rule as the simulator, and slides the window with the
predicted position. Velocity is re-derived from the window's last
displacement every step, so the prediction depends on positions only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StationaryWindowError
from .forces import SfmParams, Trajectory, wall_context
from .networks import (
    Net1Weights,
    Net2Weights,
    NetInput,
    TrajectoryWindow,
    net1_forward,
    net2_forward_parts,
)
from .scenarios import Scenario
from .validation import as_vec2, check_positive

# the networks emit forces in newtons; integration needs an explicit mass,
# which the training ranges center on
DEFAULT_MASS = 70.0

_EPS = 1e-9


@dataclass(frozen=True)
class RolloutConfig:
    horizon: float
    dt: float = 0.1
    mass: float = DEFAULT_MASS
    goal: np.ndarray | None = None
    # parameters of the wall-context feature; must match dataset generation
    wall_params: SfmParams = SfmParams()

    def __post_init__(self):
        check_positive(self.horizon, "horizon")
        check_positive(self.dt, "dt")
        check_positive(self.mass, "mass")
        if self.goal is not None:
            object.__setattr__(self, "goal", as_vec2(self.goal, "goal"))


def infer_mass(window: TrajectoryWindow | None = None,
               config: RolloutConfig | None = None) -> float:
    """Mass used to turn predicted force into acceleration (configured constant)."""
    return config.mass if config is not None else DEFAULT_MASS


def _last_heading(positions: np.ndarray) -> np.ndarray | None:
    """Most recent non-degenerate displacement direction, or None."""
    for k in range(len(positions) - 1, 0, -1):
        d = positions[k] - positions[k - 1]
        nrm = math.hypot(d[0], d[1])
        if nrm >= _EPS:
            return d / nrm
    return None


def rollout(weights: Net1Weights, seed_window: TrajectoryWindow,
            scenario: Scenario | None, config: RolloutConfig,
            t0: float = 0.0) -> Trajectory:
    """Predict round(horizon/dt) future positions from the seed window."""
    net2 = isinstance(weights, Net2Weights)
    if net2:
        if config.goal is None:
            raise ValueError("net2 rollout needs a goal in the config")
        if scenario is None or not scenario.walls:
            raise ValueError("net2 rollout needs a scenario with walls")
    if seed_window.n != weights.n:
        raise ValueError(
            f"seed window has {seed_window.n} positions, weights expect {weights.n}"
        )

    dt = config.dt
    mass = infer_mass(seed_window, config)
    positions = [p.copy() for p in seed_window.positions]
    heading = _last_heading(seed_window.positions)
    walls = list(scenario.walls) if scenario is not None else []

    steps = int(round(config.horizon / dt))
    out_t, out_p, out_v = [], [], []
    out_f, out_fa, out_fw = [], [], []

    for k in range(steps):
        window = TrajectoryWindow(np.array(positions[-seed_window.n:]), dt)
        p = positions[-1]
        if net2:
            offset = config.goal - p
            dist = math.hypot(*offset)
            if dist >= _EPS:
                e_d = offset / dist
                heading = e_d
            elif heading is not None:
                e_d = heading
            else:
                raise StationaryWindowError(
                    f"step {k}: no usable goal direction (at goal, no prior heading)"
                )
            d_w, n_w = wall_context(p, walls, config.wall_params)
            f, (fa, fw) = net2_forward_parts(
                weights, NetInput(window=window, e_d=e_d, d_w=d_w, n_w=n_w)
            )
        else:
            try:
                f = net1_forward(weights, window, fallback_e_d=heading)
            except StationaryWindowError as exc:
                raise StationaryWindowError(f"step {k}: {exc}") from exc
            fa, fw = f, np.zeros(2)

        v = (positions[-1] - positions[-2]) / dt
        v_new = v + (f / mass) * dt
        p_new = positions[-1] + v_new * dt
        positions.append(p_new)

        d = p_new - p
        nrm = math.hypot(d[0], d[1])
        if nrm >= _EPS and not net2:
            heading = d / nrm

        out_t.append(t0 + (k + 1) * dt)
        out_p.append(p_new)
        out_v.append(v_new)
        out_f.append(f)
        out_fa.append(fa)
        out_fw.append(fw)

    return Trajectory(
        times=np.array(out_t),
        positions=np.array(out_p),
        velocities=np.array(out_v),
        force_total=np.array(out_f),
        force_attractive=np.array(out_fa),
        force_wall=np.array(out_fw),
    )
