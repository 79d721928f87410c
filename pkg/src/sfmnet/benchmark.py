"""Real-track ingestion, baselines-vs-network benchmarking, report output.

Raw tracks are whitespace- or comma-separated tables with frame, pedestrian
id, x and y columns (order given by a column map, since public distributions
disagree on it). Tracks are resampled by linear interpolation onto the
network's 0.1 s grid: public pedestrian datasets annotate at 0.4 s.

The evaluation observes 1 s (one window), predicts 4.8 s, and scores
mean/final displacement errors per model. Evaluation segments tile each
track with stride equal to the observation length so no observation is
double-counted.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .baselines import ca_baseline, cv_baseline
from .errors import TrackFormatError
from .fileio import atomic_write_text, fmt_float
from .metrics import fde, mde
from .networks import Net1Weights, Net2Weights, TrajectoryWindow
from .rollout import DEFAULT_MASS, RolloutConfig, rollout
from .validation import check_positive

MODELS = ("CV", "CA", "SFM-NN")

# Published reference values for the feed-forward and LSTM comparison models
# on the standard pedestrian datasets; reported, never recomputed.
PUBLISHED_REFERENCE = {
    "mde": {
        "hotel": {"FF": 1.59, "LSTM": 0.15},
        "eth": {"FF": 0.67, "LSTM": 0.60},
        "ucy": {"FF": 0.69, "LSTM": 0.52},
        "zara1": {"FF": 0.39, "LSTM": 0.43},
        "zara2": {"FF": 0.38, "LSTM": 0.51},
    },
    "fde": {
        "hotel": {"FF": 3.12, "LSTM": 0.33},
        "eth": {"FF": 1.32, "LSTM": 1.31},
        "ucy": {"FF": 1.38, "LSTM": 1.25},
        "zara1": {"FF": 0.81, "LSTM": 0.93},
        "zara2": {"FF": 0.77, "LSTM": 1.09},
    },
}


@dataclass(frozen=True)
class ObservedTrack:
    ped_id: str
    times: np.ndarray      # strictly increasing
    positions: np.ndarray  # (T, 2)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError(f"track {self.ped_id}: timestamps not increasing")


@dataclass(frozen=True)
class EvalProtocol:
    observe_duration: float = 1.0
    predict_duration: float = 4.8
    resample_dt: float = 0.1

    def __post_init__(self):
        check_positive(self.observe_duration, "observe_duration")
        check_positive(self.predict_duration, "predict_duration")
        check_positive(self.resample_dt, "resample_dt")

    @property
    def observe_steps(self) -> int:
        return int(round(self.observe_duration / self.resample_dt))

    @property
    def predict_steps(self) -> int:
        return int(round(self.predict_duration / self.resample_dt))


def load_tracks(path, column_map: str = "frame,ped,x,y", frame_dt: float = 0.4):
    """Parse a raw table into per-pedestrian tracks.

    ``column_map`` names the meaning of the first columns, e.g. "frame,ped,y,x"
    for distributions that store y first. Timestamps are frame * frame_dt.
    Tracks with fewer than 2 points are dropped.
    """
    names = [c.strip() for c in column_map.split(",")]
    required = {"frame", "ped", "x", "y"}
    if set(names) != required:
        raise TrackFormatError(
            f"column map must name exactly {sorted(required)}, got {names}"
        )
    col = {name: i for i, name in enumerate(names)}
    check_positive(frame_dt, "frame_dt")

    by_ped: dict[str, list[tuple[float, float, float]]] = {}
    order: list[str] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.readlines()
    except OSError as exc:
        raise TrackFormatError(f"cannot read {path}: {exc}") from exc

    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = re.split(r"[,\s]+", line)
        if len(parts) < 4:
            raise TrackFormatError(f"{path}: line {lineno}: expected 4 columns")
        try:
            frame = float(parts[col["frame"]])
            x = float(parts[col["x"]])
            y = float(parts[col["y"]])
        except ValueError as exc:
            raise TrackFormatError(f"{path}: line {lineno}: {exc}") from exc
        ped = parts[col["ped"]]
        if ped not in by_ped:
            by_ped[ped] = []
            order.append(ped)
        by_ped[ped].append((frame * frame_dt, x, y))

    tracks = []
    for ped in order:
        rows = by_ped[ped]
        if len(rows) < 2:
            continue
        arr = np.array(rows)
        tracks.append(ObservedTrack(ped_id=ped, times=arr[:, 0], positions=arr[:, 1:3]))
    return tracks


def resample(track: ObservedTrack, dt: float) -> ObservedTrack:
    """Linear interpolation onto a uniform grid spanning the track's times."""
    check_positive(dt, "dt")
    t0, t1 = track.times[0], track.times[-1]
    steps = int(math.floor((t1 - t0) / dt + 1e-9))
    grid = t0 + dt * np.arange(steps + 1)
    # keep the exact endpoint when the span divides evenly
    if abs(grid[-1] - t1) < 1e-9:
        grid[-1] = t1
    x = np.interp(grid, track.times, track.positions[:, 0])
    y = np.interp(grid, track.times, track.positions[:, 1])
    return ObservedTrack(ped_id=track.ped_id, times=grid, positions=np.column_stack([x, y]))


@dataclass
class BenchmarkRow:
    dataset: str
    model: str
    mde: float
    fde: float
    n_segments: int


@dataclass
class BenchmarkResult:
    rows: list[BenchmarkRow]
    skipped_tracks: dict[str, int]

    def row(self, dataset: str, model: str) -> BenchmarkRow:
        for r in self.rows:
            if r.dataset == dataset and r.model == model:
                return r
        raise KeyError((dataset, model))


def _predict(model: str, obs: np.ndarray, protocol: EvalProtocol, weights,
             scenario, goal, mass: float) -> np.ndarray:
    h = protocol.predict_duration
    dt = protocol.resample_dt
    if model == "CV":
        return cv_baseline(obs, h, dt)
    if model == "CA":
        return ca_baseline(obs, h, dt)
    if model == "SFM-NN":
        window = TrajectoryWindow(obs, dt)
        config = RolloutConfig(horizon=h, dt=dt, mass=mass, goal=goal)
        return rollout(weights, window, scenario, config).positions
    raise ValueError(f"unknown model {model!r}")


def run_benchmark(weights: Net1Weights, tracks_by_dataset: dict, protocol: EvalProtocol,
                  *, scenario=None, goals=None, mass: float = DEFAULT_MASS,
                  models=MODELS) -> BenchmarkResult:
    """Score each model on every eligible segment of every track.

    ``tracks_by_dataset`` maps a dataset name to its ObservedTracks. Open
    networks run without walls; a walled network needs ``scenario`` plus a
    ``goals`` mapping from (dataset, ped_id) to the goal point. Tracks too
    short for one observe+predict segment are counted as skipped.
    """
    if isinstance(weights, Net2Weights):
        if scenario is None or goals is None:
            raise ValueError("a walled network needs scenario and goals")

    obs_len = protocol.observe_steps
    pred_len = protocol.predict_steps
    rows = []
    skipped = {}
    for dataset, tracks in tracks_by_dataset.items():
        errors = {m: ([], []) for m in models}
        n_skipped = 0
        for track in tracks:
            rs = resample(track, protocol.resample_dt)
            if len(rs.positions) < obs_len + pred_len:
                n_skipped += 1
                continue
            for start in range(0, len(rs.positions) - obs_len - pred_len + 1, obs_len):
                obs = rs.positions[start:start + obs_len]
                truth = rs.positions[start + obs_len:start + obs_len + pred_len]
                goal = goals.get((dataset, track.ped_id)) if goals else None
                for m in models:
                    pred = _predict(m, obs, protocol, weights, scenario, goal, mass)
                    errors[m][0].append(mde(pred, truth))
                    errors[m][1].append(fde(pred, truth))
        skipped[dataset] = n_skipped
        for m in models:
            mdes, fdes = errors[m]
            rows.append(
                BenchmarkRow(
                    dataset=dataset,
                    model=m,
                    mde=float(np.mean(mdes)) if mdes else math.nan,
                    fde=float(np.mean(fdes)) if fdes else math.nan,
                    n_segments=len(mdes),
                )
            )
    return BenchmarkResult(rows=rows, skipped_tracks=skipped)


def write_results_csv(result: BenchmarkResult, path) -> None:
    lines = ["dataset,model,mde,fde,n_segments"]

    def cell(v):
        return "" if math.isnan(v) else fmt_float(v, "%.6g")

    for r in result.rows:
        lines.append(f"{r.dataset},{r.model},{cell(r.mde)},{cell(r.fde)},{r.n_segments}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def format_results_table(result: BenchmarkResult, models=MODELS) -> str:
    """Text table of per-dataset MDE/FDE rows plus averages.

    Footer lists the published FF/LSTM reference values for datasets whose
    names match the standard ones; those numbers are reported only.
    """
    datasets = []
    for r in result.rows:
        if r.dataset not in datasets:
            datasets.append(r.dataset)

    def fmt(v):
        return "   -" if math.isnan(v) else f"{v:.2f}"

    lines = []
    width = max([len(d) for d in datasets] + [8])
    header = f"{'Metric':6} {'Dataset':{width}} " + " ".join(f"{m:>7}" for m in models)
    lines.append(header)
    lines.append("-" * len(header))
    for metric in ("mde", "fde"):
        vals = {m: [] for m in models}
        for d in datasets:
            cells = []
            for m in models:
                v = getattr(result.row(d, m), metric)
                vals[m].append(v)
                cells.append(f"{fmt(v):>7}")
            lines.append(f"{metric.upper():6} {d:{width}} " + " ".join(cells))
        avg = [f"{fmt(float(np.nanmean(vals[m]))):>7}" for m in models]
        lines.append(f"{metric.upper():6} {'average':{width}} " + " ".join(avg))
        lines.append("-" * len(header))

    refs = []
    for metric in ("mde", "fde"):
        for d in datasets:
            ref = PUBLISHED_REFERENCE[metric].get(d.lower())
            if ref:
                pairs = ", ".join(f"{k} {v:.2f}" for k, v in ref.items())
                refs.append(f"  {metric.upper()} {d}: {pairs}")
    if refs:
        lines.append("Reference values from the published comparison (not recomputed):")
        lines.extend(refs)
    return "\n".join(lines) + "\n"
