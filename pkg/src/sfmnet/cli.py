"""Command-line pipeline: simulate, gen-dataset, train, rollout, classify, eval.

Every subcommand is deterministic given its inputs and --seed; outputs are
written atomically together with a provenance sidecar (<name>.run.json)
recording the exact configuration. Exit codes: 0 success, 2 input/validation
error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import (
    EvalProtocol,
    format_results_table,
    load_tracks,
    run_benchmark,
    write_results_csv,
)
from .datasets import (
    gen_corridor_dataset,
    gen_open_dataset,
    read_dataset_csv,
    simulate_corridor_run,
    simulate_open_run,
    write_dataset_csv,
)
from .errors import (
    DatasetError,
    DegenerateGeometryError,
    ExponentOverflowError,
    NonFiniteGradientError,
    SfmNetError,
    StationaryWindowError,
    TrackFormatError,
    TrainingDivergedError,
)
from .fileio import atomic_write_text, write_run_record
from .forces import read_trajectory_csv, write_trajectory_csv
from .goals import GoalClassifierConfig, classify, write_beliefs_csv
from .networks import Net2Weights, TrajectoryWindow, load_weights, save_weights
from .rollout import RolloutConfig, rollout
from .scenarios import resolve_scenario
from .training import TrainConfig, train, write_report_csv

logger = logging.getLogger("sfmnet")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_NUMERIC_ERRORS = (
    DegenerateGeometryError,
    StationaryWindowError,
    ExponentOverflowError,
    NonFiniteGradientError,
    TrainingDivergedError,
)
_INPUT_ERRORS = (DatasetError, TrackFormatError, FileNotFoundError, ValueError)


def _read_config_file(path) -> dict:
    """key = value lines; '#' starts a comment."""
    overrides = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                overrides[key.strip()] = value.strip()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    return overrides


def _apply_overrides(args, parser_keys: set[str]) -> None:
    if not args.config:
        return
    overrides = _read_config_file(args.config)
    internal = {"func", "command", "config"}
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if attr not in parser_keys or attr in internal:
            raise ValueError(f"unknown config key {key!r}")
        current = getattr(args, attr)
        if isinstance(current, bool):
            setattr(args, attr, value.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, attr, int(value))
        elif isinstance(current, float):
            setattr(args, attr, float(value))
        else:
            setattr(args, attr, value)


def _provenance(args, extra=None) -> dict:
    record = {
        "tool": "sfmnet",
        "version": __version__,
        "numpy": np.__version__,
        "command": args.command,
        "seed": args.seed,
        "jobs": args.jobs,
    }
    skip = {"command", "seed", "jobs", "config", "func", "verbose"}

    def plain(value):
        if isinstance(value, Path):
            return str(value)
        if isinstance(value, (list, tuple)):
            return [plain(v) for v in value]
        return value

    for key in sorted(vars(args)):
        if key not in skip:
            record[key] = plain(getattr(args, key))
    if extra:
        record.update(extra)
    return record


def _require_file(path, flag: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{flag}: no such file: {path}")
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    if scenario.waypoint_areas:
        trajectory, _, _ = simulate_corridor_run(
            args.seed, 0, args.duration, args.dt, scenario,
            stop_radius=args.stop_radius,
        )
    else:
        trajectory, _, _ = simulate_open_run(
            args.seed, 0, args.duration, args.dt, stop_radius=args.stop_radius
        )
    write_trajectory_csv(trajectory, args.output)
    write_run_record(args.output, _provenance(args, {"rows": len(trajectory)}))
    logger.info("wrote %d states to %s", len(trajectory), args.output)
    return EXIT_OK


def _load_scenario_arg(name_or_path):
    if name_or_path in ("open", "corridor"):
        return resolve_scenario(name_or_path)
    return resolve_scenario(_require_file(name_or_path, "--scenario"))


def cmd_gen_dataset(args) -> int:
    if args.scenario == "open":
        dataset = gen_open_dataset(
            args.count, args.seed, duration=args.duration, dt=args.dt,
            n=args.window, jobs=args.jobs,
        )
    else:
        scenario = _load_scenario_arg(args.scenario)
        dataset = gen_corridor_dataset(
            args.count, args.seed, scenario=scenario, duration=args.duration,
            dt=args.dt, n=args.window, jobs=args.jobs,
        )
    write_dataset_csv(dataset, args.output)
    write_run_record(
        args.output,
        _provenance(args, {
            "config_digest": dataset.config_digest,
            "train_samples": len(dataset.train),
            "val_samples": len(dataset.val),
        }),
    )
    logger.info(
        "wrote %d train / %d val samples to %s",
        len(dataset.train), len(dataset.val), args.output,
    )
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = read_dataset_csv(_require_file(args.data, "--data"))
    config = TrainConfig(
        learning_rate=args.learning_rate, batch_size=args.batch_size,
        epochs=args.epochs, seed=args.seed,
    )

    def progress(epoch, train_mse, val_mse):
        if args.verbose and (epoch % max(1, args.epochs // 10) == 0 or epoch == 1):
            logger.info("epoch %d: train %.3e val %.3e", epoch, train_mse, val_mse)

    weights, report = train(args.net, dataset, config, progress=progress)
    save_weights(weights, args.output)
    if args.report:
        write_report_csv(report, args.report)
    write_run_record(
        args.output,
        _provenance(args, {
            "weights_digest": report.weights_digest,
            "final_train_mse": report.final_train_mse,
            "final_val_mse": report.final_val_mse,
            "min_train_mse": report.min_train_mse,
            "min_val_mse": report.min_val_mse,
        }),
    )
    logger.info(
        "trained %s: final train MSE %.3e, val MSE %.3e (%.1f s)",
        args.net, report.final_train_mse, report.final_val_mse, report.seconds,
    )
    return EXIT_OK


def cmd_rollout(args) -> int:
    weights = load_weights(_require_file(args.weights, "--weights"))
    observed = read_trajectory_csv(_require_file(args.observations, "--observations"))
    if len(observed) < weights.n:
        raise ValueError(
            f"observations have {len(observed)} rows, need at least {weights.n}"
        )
    seed = TrajectoryWindow(observed.positions[:weights.n], args.dt)
    scenario = _load_scenario_arg(args.scenario) if args.scenario else None
    goal = None
    if args.goal:
        parts = [float(v) for v in args.goal.split(",")]
        if len(parts) != 2:
            raise ValueError("--goal must be 'x,y'")
        goal = np.array(parts)
    config = RolloutConfig(horizon=args.horizon, dt=args.dt, mass=args.mass, goal=goal)
    t0 = float(observed.times[weights.n - 1])
    trajectory = rollout(weights, seed, scenario, config, t0=t0)
    write_trajectory_csv(trajectory, args.output)
    write_run_record(args.output, _provenance(args, {"rows": len(trajectory)}))
    logger.info("wrote %d predicted states to %s", len(trajectory), args.output)
    return EXIT_OK


def cmd_classify(args) -> int:
    weights = load_weights(_require_file(args.weights, "--weights"))
    if not isinstance(weights, Net2Weights):
        raise ValueError("classification needs walled-network (net2) weights")
    observed = read_trajectory_csv(_require_file(args.observations, "--observations"))
    scenario = _load_scenario_arg(args.scenario)
    config = GoalClassifierConfig(
        sigma=args.sigma, floor=args.floor,
        decision_threshold=args.threshold, reseed_every=args.reseed,
        mass=args.mass, include_stop_hypothesis=args.stop_hypothesis,
    )
    belief = classify(
        observed.positions, scenario, weights, config,
        dt=args.dt, t0=float(observed.times[0]),
    )
    write_beliefs_csv(belief, args.output)
    write_run_record(
        args.output,
        _provenance(args, {
            "decision": belief.decision,
            "decision_time": belief.decision_time,
            "hypotheses": belief.hypothesis_names,
        }),
    )
    logger.info("decision: %s (t=%s)", belief.decision, belief.decision_time)
    return EXIT_OK


def cmd_eval(args) -> int:
    weights = load_weights(_require_file(args.weights, "--weights"))
    tracks_by_dataset = {}
    for path in args.tracks:
        path = _require_file(path, "--tracks")
        tracks_by_dataset[path.stem] = load_tracks(
            path, column_map=args.columns, frame_dt=args.frame_dt
        )
    protocol = EvalProtocol(
        observe_duration=args.observe, predict_duration=args.predict,
        resample_dt=args.resample_dt,
    )
    result = run_benchmark(weights, tracks_by_dataset, protocol)
    write_results_csv(result, args.output)
    table = format_results_table(result)
    if args.table:
        atomic_write_text(args.table, table)
    write_run_record(
        args.output,
        _provenance(args, {"skipped_tracks": result.skipped_tracks}),
    )
    sys.stdout.write(table)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfmnet",
        description="Social-force-structured trajectory prediction pipeline",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="run seed")
        p.add_argument("--jobs", type=int, default=1, help="parallelism bound")
        p.add_argument("--config", type=Path, default=None,
                       help="key=value file overriding flags")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("simulate", help="run one pedestrian simulation")
    p.add_argument("--scenario", default="open", help="open, corridor, or a scenario file")
    p.add_argument("--duration", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--stop-radius", dest="stop_radius", type=float, default=0.0,
                   help="end early within this distance of the goal (0 = never)")
    p.add_argument("-o", "--output", type=Path, default=Path("trajectory.csv"))
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen-dataset", help="generate a synthetic training dataset")
    p.add_argument("--scenario", default="open")
    p.add_argument("--count", type=int, required=True, help="number of simulations")
    p.add_argument("--duration", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("-o", "--output", type=Path, default=Path("dataset.csv"))
    common(p)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("train", help="train a force network on a dataset")
    p.add_argument("--net", choices=("net1", "net2"), required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=0.005)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=128)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("-o", "--output", type=Path, default=Path("weights.json"))
    p.add_argument("--report", type=Path, default=None, help="per-epoch MSE csv")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rollout", help="open-loop prediction from an observed window")
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--observations", type=Path, required=True,
                   help="trajectory csv; the first window seeds the rollout")
    p.add_argument("--scenario", default=None)
    p.add_argument("--goal", default=None, help="x,y goal point (net2)")
    p.add_argument("--horizon", type=float, default=4.8)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--mass", type=float, default=70.0)
    p.add_argument("-o", "--output", type=Path, default=Path("prediction.csv"))
    common(p)
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("classify", help="infer the goal from observed motion")
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--observations", type=Path, required=True)
    p.add_argument("--scenario", default="corridor")
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--floor", type=float, default=1e-3)
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--reseed", type=int, default=10)
    p.add_argument("--mass", type=float, default=70.0)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--stop-hypothesis", dest="stop_hypothesis", action="store_true")
    p.add_argument("-o", "--output", type=Path, default=Path("beliefs.csv"))
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="benchmark against CV/CA baselines")
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--tracks", type=Path, nargs="+", required=True)
    p.add_argument("--columns", default="frame,ped,x,y")
    p.add_argument("--frame-dt", dest="frame_dt", type=float, default=0.4)
    p.add_argument("--observe", type=float, default=1.0)
    p.add_argument("--predict", type=float, default=4.8)
    p.add_argument("--resample-dt", dest="resample_dt", type=float, default=0.1)
    p.add_argument("-o", "--output", type=Path, default=Path("results.csv"))
    p.add_argument("--table", type=Path, default=None, help="formatted text table")
    common(p)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        _apply_overrides(args, set(vars(args)))
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        logger.error("numeric failure: %s", exc)
        print(f"sfmnet: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _INPUT_ERRORS as exc:
        print(f"sfmnet: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SfmNetError as exc:
        print(f"sfmnet: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
