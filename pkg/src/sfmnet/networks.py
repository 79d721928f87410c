"""Structured force networks and their exact reverse-mode gradients.

Both networks share an attractive part whose wiring mirrors the goal force:

    f_attr = sigmoid(D @ W_speed) @ w_speed_scale * e_d
             - tanh(flatten(dp) @ W_vel) * w_vel_scale

where dp is the window normalized to its first sample, D holds the per-step
displacement magnitudes, and e_d is the heading. The open-space network
(net1) takes e_d from the most recent displacement; the walled network
(net2) receives e_d as an input and adds an exponential repulsive branch

    f_rep = rep_amplitude * exp(d_w / rep_decay) * n_w * rep_scale.

The sigmoid keeps the speed-branch magnitude positive when the scale vector
is positive. Gradients of the per-sample loss 0.5 * ||f_hat - f||^2 are
hand-derived; the batched variants reduce in fixed sample order so training
is bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DatasetError, ExponentOverflowError, StationaryWindowError
from .fileio import atomic_write_text, dumps_json17
from .validation import as_positions, as_vec2, check_positive

SPEED_UNITS = 10          # width of the desired-speed branch
STATIONARY_EPS = 1e-9
EXP_OVERFLOW = 700.0      # exp() overflows float64 past this
WEIGHT_FORMAT_VERSION = "1"


@dataclass(frozen=True)
class TrajectoryWindow:
    """The n most recent planar positions of one agent, oldest first."""

    positions: np.ndarray  # (n, 2)
    dt: float

    def __post_init__(self):
        object.__setattr__(self, "positions", as_positions(self.positions, "window"))
        if len(self.positions) < 2:
            raise ValueError("window needs at least 2 positions")
        check_positive(self.dt, "dt")

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class NetInput:
    """net2 evaluation input: window plus wall/goal context at current time."""

    window: TrajectoryWindow
    e_d: np.ndarray
    d_w: float
    n_w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e_d", as_vec2(self.e_d, "e_d"))
        object.__setattr__(self, "n_w", as_vec2(self.n_w, "n_w"))
        check_positive(self.d_w, "d_w")


@dataclass(frozen=True)
class Net1Weights:
    """Open-space network weights.

    speed_weights (n-1, 10) and speed_scale (10,) house the m*v_des/tau
    magnitude; velocity_weights (2n, 2) and velocity_scale (2,) house the
    m*v/tau term on the flattened window (x0,y0,...,x9,y9 order).
    """

    speed_weights: np.ndarray
    speed_scale: np.ndarray
    velocity_weights: np.ndarray
    velocity_scale: np.ndarray

    @property
    def n(self) -> int:
        return self.velocity_weights.shape[0] // 2

    @property
    def net_type(self) -> str:
        return "net1"


@dataclass(frozen=True)
class Net2Weights(Net1Weights):
    """Walled-environment network: net1 fields plus the repulsive branch.

    rep_amplitude and rep_decay play the role of the wall parameters
    (amplitude houses A*exp(r/B), decay houses -B); rep_scale is the
    per-axis output rescale.
    """

    rep_amplitude: float = 1.0
    rep_decay: float = -0.1
    rep_scale: np.ndarray = None

    @property
    def net_type(self) -> str:
        return "net2"


def init_net1(n: int = 10, seed: int = 0) -> Net1Weights:
    """Fresh net1 weights.

    Matrices and rescale vectors start uniform in [-0.1, 0.1] except the
    speed rescale, which starts at 10 per unit so the speed term opens at a
    plausible force magnitude. The trainer optimizes against unit-normalized
    labels, where these are all within a few Adam steps of useful scales.
    """
    rng = np.random.default_rng(seed)
    return Net1Weights(
        speed_weights=rng.uniform(-0.1, 0.1, (n - 1, SPEED_UNITS)),
        speed_scale=np.full(SPEED_UNITS, 10.0),
        velocity_weights=rng.uniform(-0.1, 0.1, (2 * n, 2)),
        velocity_scale=rng.uniform(-0.1, 0.1, 2),
    )


def init_net2(n: int = 10, seed: int = 0) -> Net2Weights:
    """net2 weights: net1 init plus the repulsive branch.

    The decay starts at -0.1 m so the exponent decays with distance; the
    sign itself stays learnable.
    """
    base = init_net1(n, seed)
    return Net2Weights(
        speed_weights=base.speed_weights,
        speed_scale=base.speed_scale,
        velocity_weights=base.velocity_weights,
        velocity_scale=base.velocity_scale,
        rep_amplitude=1.0,
        rep_decay=-0.1,
        rep_scale=np.ones(2),
    )


def scale_output(weights: Net1Weights, factor: float) -> Net1Weights:
    """Multiply the network's output by ``factor`` exactly.

    The forward map is linear in speed_scale, velocity_scale and rep_scale,
    so rescaling those vectors rescales the emitted force. Used to fold a
    label normalization back into trained weights.
    """
    updates = {
        "speed_scale": weights.speed_scale * factor,
        "velocity_scale": weights.velocity_scale * factor,
    }
    if isinstance(weights, Net2Weights):
        updates["rep_scale"] = weights.rep_scale * factor
    return replace(weights, **updates)


def param_count(weights: Net1Weights) -> int:
    total = 0
    for f in fields(weights):
        value = getattr(weights, f.name)
        total += value.size if isinstance(value, np.ndarray) else 1
    return total


def speed_branch_param_count(weights: Net1Weights) -> int:
    return weights.speed_weights.size + weights.speed_scale.size


def features(window: TrajectoryWindow):
    """(dp, dp1, D): normalized window, latest displacement, step magnitudes."""
    p = window.positions
    dp = p - p[0]
    dp1 = p[-1] - p[-2]
    segs = p[1:] - p[:-1]
    D = np.hypot(segs[:, 0], segs[:, 1])
    return dp, dp1, D


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _check_shapes(weights: Net1Weights, n: int) -> None:
    w = weights
    ok = (
        w.speed_weights.shape == (n - 1, SPEED_UNITS)
        and w.speed_scale.shape == (SPEED_UNITS,)
        and w.velocity_weights.shape == (2 * n, 2)
        and w.velocity_scale.shape == (2,)
    )
    if isinstance(w, Net2Weights):
        ok = ok and np.shape(w.rep_scale) == (2,)
    if not ok:
        raise ValueError(f"weight shapes do not match window length n={n}")


# ---------------------------------------------------------------------------
# batched forward/backward (the per-sample API wraps these with K=1)
# ---------------------------------------------------------------------------


def _batch_features(P: np.ndarray):
    dp = P - P[:, :1, :]
    flat = dp.reshape(len(P), -1)
    segs = P[:, 1:, :] - P[:, :-1, :]
    D = np.hypot(segs[:, :, 0], segs[:, :, 1])
    dp1 = P[:, -1, :] - P[:, -2, :]
    return dp, flat, D, dp1


def batch_forward(
    weights: Net1Weights,
    P: np.ndarray,
    e_d: np.ndarray | None = None,
    d_w: np.ndarray | None = None,
    n_w: np.ndarray | None = None,
    fallback_e_d: np.ndarray | None = None,
):
    """Forward pass over a batch of windows P (K, n, 2).

    For net1 the heading comes from each window's last displacement; rows
    with a degenerate displacement raise StationaryWindowError unless
    ``fallback_e_d`` is given. Returns (force (K,2), cache for backward).
    """
    P = np.asarray(P, dtype=np.float64)
    K, n, _ = P.shape
    _check_shapes(weights, n)
    net2 = isinstance(weights, Net2Weights)

    dp, flat, D, dp1 = _batch_features(P)
    if net2:
        if e_d is None or d_w is None or n_w is None:
            raise DatasetError("net2 forward needs e_d, d_w and n_w inputs")
        e = np.asarray(e_d, dtype=np.float64).reshape(K, 2)
    else:
        norm = np.hypot(dp1[:, 0], dp1[:, 1])
        bad = norm < STATIONARY_EPS
        if np.any(bad):
            if fallback_e_d is None:
                idx = int(np.argmax(bad))
                raise StationaryWindowError(
                    f"window {idx}: last displacement {norm[idx]:.3e} m is too "
                    "small to define a heading"
                )
            e = np.where(bad[:, None], np.asarray(fallback_e_d), dp1 / np.where(bad, 1.0, norm)[:, None])
        else:
            e = dp1 / norm[:, None]

    S = _sigmoid(D @ weights.speed_weights)           # (K, 10)
    mag = S @ weights.speed_scale                      # (K,)
    U = flat @ weights.velocity_weights                # (K, 2)
    H = np.tanh(U)
    vel = H * weights.velocity_scale
    attr = mag[:, None] * e - vel

    cache = {"D": D, "flat": flat, "S": S, "H": H, "e": e}
    if net2:
        d_w = np.asarray(d_w, dtype=np.float64).reshape(K)
        n_w = np.asarray(n_w, dtype=np.float64).reshape(K, 2)
        exponent = d_w / weights.rep_decay
        over = exponent > EXP_OVERFLOW
        if np.any(over):
            idx = int(np.argmax(over))
            raise ExponentOverflowError(
                f"sample {idx}: exponent d_w/rep_decay = {exponent[idx]:.3g} "
                f"(d_w={d_w[idx]:.3g}, rep_decay={weights.rep_decay:.3g}) overflows"
            )
        E = np.exp(exponent)
        rep = (weights.rep_amplitude * E)[:, None] * n_w * weights.rep_scale
        cache.update({"E": E, "d_w": d_w, "n_w": n_w, "rep": rep})
        return attr + rep, cache
    return attr, cache


def batch_backward(weights: Net1Weights, cache: dict, rho: np.ndarray):
    """Mean over the batch of per-sample gradients of 0.5*||f_hat - f||^2.

    ``rho`` is f_hat - f, shape (K, 2). Returns a weights-shaped container.
    """
    K = len(rho)
    S, H, e, D, flat = cache["S"], cache["H"], cache["e"], cache["D"], cache["flat"]

    d_mag = np.einsum("kc,kc->k", rho, e)                      # dL/d magnitude
    g_speed_scale = S.T @ d_mag / K
    dS = d_mag[:, None] * weights.speed_scale
    dZ = dS * S * (1.0 - S)
    g_speed_weights = D.T @ dZ / K

    g_velocity_scale = -(rho * H).sum(axis=0) / K
    dU = -(rho * weights.velocity_scale) * (1.0 - H * H)
    g_velocity_weights = flat.T @ dU / K

    if isinstance(weights, Net2Weights):
        E, d_w, n_w = cache["E"], cache["d_w"], cache["n_w"]
        rho_scaled = rho * weights.rep_scale
        c = np.einsum("kc,kc->k", rho_scaled, n_w)
        g_amp = float((E * c).sum() / K)
        g_decay = float(
            (weights.rep_amplitude * E * c * (-d_w / weights.rep_decay**2)).sum() / K
        )
        g_rep_scale = (rho * (weights.rep_amplitude * E)[:, None] * n_w).sum(axis=0) / K
        return Net2Weights(
            speed_weights=g_speed_weights,
            speed_scale=g_speed_scale,
            velocity_weights=g_velocity_weights,
            velocity_scale=g_velocity_scale,
            rep_amplitude=g_amp,
            rep_decay=g_decay,
            rep_scale=g_rep_scale,
        )
    return Net1Weights(
        speed_weights=g_speed_weights,
        speed_scale=g_speed_scale,
        velocity_weights=g_velocity_weights,
        velocity_scale=g_velocity_scale,
    )


# ---------------------------------------------------------------------------
# per-sample API
# ---------------------------------------------------------------------------


def net1_forward(
    weights: Net1Weights,
    window: TrajectoryWindow,
    fallback_e_d: np.ndarray | None = None,
) -> np.ndarray:
    """Predicted goal force from the window alone."""
    out, _ = batch_forward(weights, window.positions[None], fallback_e_d=fallback_e_d)
    return out[0]


def net2_forward(weights: Net2Weights, inp: NetInput) -> np.ndarray:
    total, _ = net2_forward_parts(weights, inp)
    return total


def net2_forward_parts(weights: Net2Weights, inp: NetInput):
    """(total force, (attractive part, repulsive part))."""
    out, cache = batch_forward(
        weights,
        inp.window.positions[None],
        e_d=inp.e_d[None],
        d_w=np.array([inp.d_w]),
        n_w=inp.n_w[None],
    )
    rep = cache["rep"][0]
    return out[0], (out[0] - rep, rep)


def backward(weights: Net1Weights, inp, label_force) -> Net1Weights:
    """Gradients of 0.5*||f_hat - f||^2 for one sample.

    ``inp`` is a TrajectoryWindow for net1 or a NetInput for net2. The
    returned object reuses the weight class as a same-shaped container.
    """
    label = as_vec2(label_force, "label_force")
    if isinstance(weights, Net2Weights):
        if not isinstance(inp, NetInput):
            raise TypeError("net2 backward needs a NetInput")
        out, cache = batch_forward(
            weights,
            inp.window.positions[None],
            e_d=inp.e_d[None],
            d_w=np.array([inp.d_w]),
            n_w=inp.n_w[None],
        )
    else:
        window = inp.window if isinstance(inp, NetInput) else inp
        out, cache = batch_forward(weights, window.positions[None])
    rho = out - label[None]
    return batch_backward(weights, cache, rho)


# ---------------------------------------------------------------------------
# weight file I/O (JSON, 17-significant-digit floats, row-major arrays)
# ---------------------------------------------------------------------------


def save_weights(weights: Net1Weights, path) -> None:
    atomic_write_text(path, weights_to_json(weights))


def weights_to_json(weights: Net1Weights) -> str:
    doc = {
        "format_version": WEIGHT_FORMAT_VERSION,
        "net_type": weights.net_type,
        "n": weights.n,
    }
    for f in fields(weights):
        doc[f.name] = getattr(weights, f.name)
    return dumps_json17(doc) + "\n"


def load_weights(path) -> Net1Weights:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot read weight file {path}: {exc}") from exc
    return weights_from_dict(doc, source=str(path))


def weights_from_dict(doc: dict, source: str = "<dict>") -> Net1Weights:
    try:
        version = doc["format_version"]
        net_type = doc["net_type"]
        n = int(doc["n"])
    except KeyError as exc:
        raise DatasetError(f"{source}: missing weight-file field {exc}") from exc
    if version != WEIGHT_FORMAT_VERSION:
        raise DatasetError(f"{source}: unsupported format_version {version!r}")
    if net_type not in ("net1", "net2"):
        raise DatasetError(f"{source}: unknown net_type {net_type!r}")

    def arr(name, shape):
        try:
            a = np.asarray(doc[name], dtype=np.float64)
        except KeyError as exc:
            raise DatasetError(f"{source}: missing array {exc}") from exc
        if a.shape != shape:
            raise DatasetError(f"{source}: {name} has shape {a.shape}, want {shape}")
        return a

    kwargs = {
        "speed_weights": arr("speed_weights", (n - 1, SPEED_UNITS)),
        "speed_scale": arr("speed_scale", (SPEED_UNITS,)),
        "velocity_weights": arr("velocity_weights", (2 * n, 2)),
        "velocity_scale": arr("velocity_scale", (2,)),
    }
    if net_type == "net1":
        return Net1Weights(**kwargs)
    decay = float(doc.get("rep_decay", 0.0))
    if decay == 0.0:
        raise DatasetError(f"{source}: rep_decay must be nonzero")
    return Net2Weights(
        **kwargs,
        rep_amplitude=float(doc["rep_amplitude"]),
        rep_decay=decay,
        rep_scale=arr("rep_scale", (2,)),
    )
