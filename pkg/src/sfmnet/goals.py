"""Multi-goal prediction: per-goal rollouts scored by a mode-probability recursion.

One walled-network rollout is produced per candidate exit (waypoint area,
excluding the one the agent started from). At each observation step the
rollouts are scored with an isotropic Gaussian residual likelihood and the
mode probabilities follow the first-order recursion

    mu_j  <-  L_j * mu_j / sum_i L_i * mu_i

followed by flooring and renormalization. Flooring keeps no hypothesis
permanently locked out: the normalize-floor-normalize order bounds every
reported belief below by floor / (1 + (J-1) * floor).

Rollouts are re-seeded from the latest observed window every few steps so
open-loop drift cannot corrupt the likelihoods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SfmNetError
from .fileio import atomic_write_text, fmt_float
from .networks import Net2Weights, TrajectoryWindow
from .rollout import RolloutConfig, rollout
from .scenarios import Scenario
from .validation import as_positions, check_positive


@dataclass(frozen=True)
class GoalClassifierConfig:
    sigma: float = 0.3            # m, residual std of the likelihood model
    floor: float = 1e-3           # lower bound on mode probabilities
    decision_threshold: float = 0.8
    reseed_every: int = 10        # observation steps between rollout re-seeds
    mass: float = 70.0
    include_stop_hypothesis: bool = False

    def __post_init__(self):
        check_positive(self.sigma, "sigma")
        if not (0.0 <= self.floor < 1.0):
            raise ValueError("floor must be in [0, 1)")
        if not (0.0 < self.decision_threshold <= 1.0):
            raise ValueError("decision_threshold must be in (0, 1]")
        if self.reseed_every < 1:
            raise ValueError("reseed_every must be at least 1")


@dataclass
class GoalBelief:
    """Per-hypothesis probability traces over the observation steps."""

    hypothesis_names: list[str]
    times: np.ndarray             # (T,)
    probabilities: np.ndarray     # (T, J), rows sum to 1
    decision: str = "undecided"
    decision_time: float | None = None
    warnings: list[str] = field(default_factory=list)


def likelihood(observation, predicted, sigma: float) -> float:
    """Isotropic Gaussian density of (observation - predicted), covariance sigma^2 I."""
    check_positive(sigma, "sigma")
    observation = np.asarray(observation, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    r2 = float(np.sum((observation - predicted) ** 2))
    return math.exp(-r2 / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma)


def update_beliefs(beliefs, observation, predicted_points, sigma: float, floor: float):
    """One recursion step; returns (new beliefs, all_zero_warning).

    ``predicted_points`` has one planar point per hypothesis. If every
    likelihood underflows to zero the beliefs reset to uniform.
    """
    beliefs = np.asarray(beliefs, dtype=np.float64)
    predicted_points = np.asarray(predicted_points, dtype=np.float64)
    L = np.array([likelihood(observation, p, sigma) for p in predicted_points])
    posterior = L * beliefs
    total = posterior.sum()
    if total <= 0.0 or not np.isfinite(total):
        J = len(beliefs)
        return np.full(J, 1.0 / J), True
    posterior /= total
    posterior = np.maximum(posterior, floor)
    posterior /= posterior.sum()
    return posterior, False


def classify(observations, scenario: Scenario, weights: Net2Weights,
             config: GoalClassifierConfig | None = None,
             dt: float = 0.1, t0: float = 0.0) -> GoalBelief:
    """Infer the most likely exit from a stream of observed positions.

    ``observations`` is a (T, 2) array sampled at ``dt``. The start area is
    the waypoint area nearest the first observation; every other area
    becomes a hypothesis. Needs at least n + 2 observations (one window to
    seed plus steps to score).
    """
    if config is None:
        config = GoalClassifierConfig()
    obs = as_positions(observations, "observations")
    n = weights.n
    if len(obs) < n + 1:
        raise ValueError(f"need more than {n} observations, got {len(obs)}")
    if len(scenario.waypoint_areas) < 3:
        raise ValueError("scenario needs at least 3 waypoint areas")

    start_area = scenario.nearest_area(obs[0])
    hypotheses = [a for a in scenario.waypoint_areas if a.name != start_area.name]
    names = [a.name for a in hypotheses]
    goals: list[np.ndarray | None] = [a.center for a in hypotheses]
    if config.include_stop_hypothesis:
        names.append("stop")
        goals.append(None)
    J = len(names)

    beliefs = np.full(J, 1.0 / J)
    predicted: dict[int, np.ndarray] = {}
    warnings: list[str] = []
    disqualified = np.zeros(J, dtype=bool)

    def reseed(step: int) -> None:
        """Re-run all rollouts from the window ending at observation ``step``."""
        window = TrajectoryWindow(obs[step - n + 1:step + 1].copy(), dt)
        horizon = config.reseed_every * dt
        predicted.clear()
        for j, goal in enumerate(goals):
            if disqualified[j]:
                continue
            if goal is None:
                pred = np.repeat(obs[step][None], config.reseed_every, axis=0)
            else:
                try:
                    traj = rollout(
                        weights, window, scenario,
                        RolloutConfig(horizon=horizon, dt=dt, mass=config.mass, goal=goal),
                    )
                    pred = traj.positions
                except SfmNetError as exc:
                    disqualified[j] = True
                    warnings.append(f"hypothesis {names[j]} disqualified: {exc}")
                    continue
            predicted[j] = pred

    times: list[float] = []
    trace: list[np.ndarray] = []
    decision = "undecided"
    decision_time = None

    last_seed = n - 1
    reseed(last_seed)
    for step in range(n, len(obs)):
        if step - last_seed > config.reseed_every:
            last_seed = step - 1
            reseed(last_seed)
        offset = step - last_seed - 1
        points = []
        for j in range(J):
            if disqualified[j] or j not in predicted:
                points.append(None)
            else:
                points.append(predicted[j][offset])
        live = [j for j in range(J) if points[j] is not None]
        if not live:
            raise SfmNetError("all hypotheses disqualified")

        sub, warned = update_beliefs(
            beliefs[live], obs[step], [points[j] for j in live],
            config.sigma, config.floor,
        )
        if warned:
            warnings.append(f"step {step}: all likelihoods underflowed; uniform reset")
        beliefs = np.zeros(J)
        beliefs[live] = sub

        times.append(t0 + step * dt)
        trace.append(beliefs.copy())
        if decision == "undecided":
            best = int(np.argmax(beliefs))
            if beliefs[best] > config.decision_threshold:
                decision = names[best]
                decision_time = times[-1]

    return GoalBelief(
        hypothesis_names=names,
        times=np.array(times),
        probabilities=np.array(trace),
        decision=decision,
        decision_time=decision_time,
        warnings=warnings,
    )


def write_beliefs_csv(belief: GoalBelief, path) -> None:
    """CSV trace (t,hyp_name,probability), one row per hypothesis per step."""
    lines = ["t,hyp_name,probability"]
    for i, t in enumerate(belief.times):
        for j, name in enumerate(belief.hypothesis_names):
            lines.append(
                f"{fmt_float(t, '%.9g')},{name},{fmt_float(belief.probabilities[i, j], '%.9g')}"
            )
    atomic_write_text(path, "\n".join(lines) + "\n")
