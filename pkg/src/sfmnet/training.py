"""Mini-batch Adam training of the force networks on MSE loss.

The loss is the mean over all scalar force components (2 per sample), so
reported magnitudes are comparable across batch sizes. Batch gradients are
the mean of per-sample gradients, reduced in sample-index order; together
with seeded shuffling this makes a run bit-reproducible from
(seed, config, dataset).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, fields

import numpy as np

from .errors import DatasetError, NonFiniteGradientError, TrainingDivergedError
from .fileio import atomic_write_text, fmt_float, sha256_text
from .networks import (
    Net1Weights,
    Net2Weights,
    batch_backward,
    batch_forward,
    init_net1,
    init_net2,
    scale_output,
    weights_to_json,
)

DIVERGENCE_FACTOR = 10.0


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.005
    batch_size: int = 128
    epochs: int = 300
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")


@dataclass
class TrainReport:
    """Per-epoch loss curves on the normalized label scale.

    Labels are divided by ``force_scale`` (max absolute training-label
    component, floored at 1 N) before optimization; the returned weights
    have the scale folded back in, so multiply an MSE by force_scale**2 for
    squared newtons.
    """

    train_mse: list[float]
    val_mse: list[float]
    weights_digest: str
    seconds: float
    force_scale: float = 1.0

    @property
    def final_train_mse(self) -> float:
        return self.train_mse[-1]

    @property
    def final_val_mse(self) -> float:
        return self.val_mse[-1]

    @property
    def min_train_mse(self) -> float:
        return min(self.train_mse)

    @property
    def min_val_mse(self) -> float:
        return float(np.nanmin(self.val_mse))

    @property
    def final_val_mse_newtons(self) -> float:
        return self.final_val_mse * self.force_scale**2

    @property
    def final_train_mse_newtons(self) -> float:
        return self.final_train_mse * self.force_scale**2


def mse_loss(predictions, labels) -> float:
    """Mean squared error over all 2K scalar components."""
    predictions = np.asarray(predictions, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if predictions.shape != labels.shape:
        raise ValueError(f"shape mismatch: {predictions.shape} vs {labels.shape}")
    if predictions.size == 0:
        raise ValueError("mse_loss of empty input")
    return float(np.mean((predictions - labels) ** 2))


def _tree_map(fn, *objs):
    """Apply fn over matching weight-container fields, rebuilding the class."""
    first = objs[0]
    out = {}
    for f in fields(first):
        values = [getattr(o, f.name) for o in objs]
        result = fn(f.name, *values)
        if not isinstance(values[0], np.ndarray):
            result = float(result)
        out[f.name] = result
    return type(first)(**out)


def zeros_like_weights(weights):
    return _tree_map(lambda name, w: np.zeros_like(w) if isinstance(w, np.ndarray) else 0.0, weights)


@dataclass
class AdamMoments:
    m: Net1Weights
    v: Net1Weights

    @classmethod
    def for_weights(cls, weights):
        return cls(m=zeros_like_weights(weights), v=zeros_like_weights(weights))


def adam_step(weights, grads, moments: AdamMoments, t: int, config: TrainConfig):
    """One bias-corrected Adam update; returns (weights', moments')."""
    if t < 1:
        raise ValueError("step index t must be >= 1")
    for f in fields(grads):
        g = getattr(grads, f.name)
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"non-finite gradient in {f.name}")

    b1, b2 = config.beta1, config.beta2
    new_m = _tree_map(lambda name, m, g: b1 * m + (1 - b1) * g, moments.m, grads)
    new_v = _tree_map(lambda name, v, g: b2 * v + (1 - b2) * np.square(g), moments.v, grads)
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t

    def update(name, w, m, v):
        m_hat = m / bc1
        v_hat = v / bc2
        return w - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)

    new_weights = _tree_map(update, weights, new_m, new_v)
    return new_weights, AdamMoments(m=new_m, v=new_v)


def pack_samples(samples, net_type: str):
    """Stack sample windows/labels (and net2 aux inputs) into arrays."""
    if not samples:
        return None
    P = np.stack([s.window.positions for s in samples])
    Y = np.stack([s.label_force for s in samples])
    if net_type == "net2":
        missing = [i for i, s in enumerate(samples) if not s.has_aux]
        if missing:
            raise DatasetError(
                f"net2 training needs aux inputs; sample {missing[0]} has none"
            )
        e = np.stack([s.e_d for s in samples])
        dw = np.array([s.d_w for s in samples])
        nw = np.stack([s.n_w for s in samples])
        return {"P": P, "Y": Y, "e": e, "dw": dw, "nw": nw}
    return {"P": P, "Y": Y}


def _forward_packed(weights, packed, idx=None):
    if idx is None:
        idx = slice(None)
    if isinstance(weights, Net2Weights):
        return batch_forward(
            weights, packed["P"][idx],
            e_d=packed["e"][idx], d_w=packed["dw"][idx], n_w=packed["nw"][idx],
        )
    return batch_forward(weights, packed["P"][idx])


def train(net_type: str, dataset, config: TrainConfig, *, progress=None):
    """Train a network on a DatasetSplit; returns (weights, TrainReport)."""
    if net_type not in ("net1", "net2"):
        raise ValueError(f"unknown net_type {net_type!r}")
    train_packed = pack_samples(dataset.train, net_type)
    if train_packed is None:
        raise DatasetError("training split is empty")
    val_packed = pack_samples(dataset.val, net_type)
    return train_arrays(net_type, train_packed, val_packed, config, n=dataset.n, progress=progress)


def train_arrays(net_type: str, train_packed: dict, val_packed: dict | None,
                 config: TrainConfig, *, n: int | None = None, progress=None):
    """Array-level training loop shared by train() and the estimators.

    Optimizes against labels normalized by the max absolute training-label
    component (floored at 1 N); the normalization is folded back into the
    returned weights, which therefore emit newtons.
    """
    start = time.perf_counter()
    if n is None:
        n = train_packed["P"].shape[1]
    weights = init_net1(n, config.seed) if net_type == "net1" else init_net2(n, config.seed)
    moments = AdamMoments.for_weights(weights)
    rng = np.random.default_rng([config.seed, 1])

    force_scale = max(1.0, float(np.max(np.abs(train_packed["Y"]))))
    Y_train = train_packed["Y"] / force_scale
    Y_val = val_packed["Y"] / force_scale if val_packed is not None else None

    K = len(train_packed["P"])
    t = 0
    train_curve: list[float] = []
    val_curve: list[float] = []
    reference = None

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(K)
        sq_sum = 0.0
        for lo in range(0, K, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            out, cache = _forward_packed(weights, train_packed, idx)
            rho = out - Y_train[idx]
            sq_sum += float(np.sum(rho * rho))
            grads = batch_backward(weights, cache, rho)
            t += 1
            weights, moments = adam_step(weights, grads, moments, t, config)
        epoch_mse = sq_sum / (2.0 * K)
        train_curve.append(epoch_mse)

        if val_packed is not None:
            val_out, _ = _forward_packed(weights, val_packed)
            val_curve.append(mse_loss(val_out, Y_val))
        else:
            val_curve.append(math.nan)

        if reference is None:
            reference = epoch_mse
        elif epoch_mse > DIVERGENCE_FACTOR * reference:
            raise TrainingDivergedError(
                f"epoch {epoch}: train MSE {epoch_mse:.3e} exceeds "
                f"{DIVERGENCE_FACTOR:g}x the initial {reference:.3e}"
            )
        if progress is not None:
            progress(epoch, epoch_mse, val_curve[-1])

    weights = scale_output(weights, force_scale)
    report = TrainReport(
        train_mse=train_curve,
        val_mse=val_curve,
        weights_digest=sha256_text(weights_to_json(weights)),
        seconds=time.perf_counter() - start,
        force_scale=force_scale,
    )
    return weights, report


def write_report_csv(report: TrainReport, path) -> None:
    lines = ["epoch,train_mse,val_mse"]
    for i, (tr, va) in enumerate(zip(report.train_mse, report.val_mse), start=1):
        va_str = "" if math.isnan(va) else fmt_float(va, "%.10g")
        lines.append(f"{i},{fmt_float(tr, '%.10g')},{va_str}")
    atomic_write_text(path, "\n".join(lines) + "\n")
