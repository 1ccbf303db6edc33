"""Command-line entry point.

Every option can also be set in a flat ``key = value`` config file passed with
``--config`` (``#`` starts a comment, keys use the option names with either
dashes or underscores). Command-line flags override the file.

Commands::

    phenowarp simulate       synthetic two-year observation files
    phenowarp preprocess     fill, smooth and resample onto a common grid
    phenowarp select-window  discriminative window from class medians
    phenowarp classify       replicated stratified experiment
    phenowarp evaluate       metrics from a predictions file
    phenowarp distance       print the cost matrices of one pair of fields
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .classify import (
    ExperimentConfig,
    evaluate_predictions,
    read_predictions,
    run_experiment,
)
from .distance import Measure, WarpConfig, cost_matrices
from .exceptions import CoverageError, PhenowarpError, UnfillableError
from .ingest import (
    build_field_samples,
    parse_labels,
    parse_observations,
    samples_to_rows,
    write_labels,
    write_observations,
)
from .preprocess import common_grid, prepare
from .series import FieldSample
from .simulate import SCENARIOS, generate_dataset
from .vegindex import IndexKind
from .window import WindowPolicy, select_window, write_score_curve

logger = logging.getLogger("phenowarp")


class ConfigError(PhenowarpError):
    """Malformed config file or unknown key."""


def read_config(path) -> Dict[str, str]:
    """Parse a flat ``key = value`` file; keys are normalized to underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _window_arg(text):
    if text in (None, "", "none"):
        return None
    try:
        o1, o2 = (float(v) for v in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be 'o1,o2', got {text!r}") from None
    return (o1, o2)


# ---------------------------------------------------------------------------
# argument parser


def _common(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int, default=0, help="root random seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads for distances")
    p.add_argument("--out", default=".", help="output directory")


def _warp_args(p, measure="VDTW"):
    p.add_argument("--measure", default=measure, choices=[m.value for m in Measure])
    p.add_argument("--band-days", type=float, default=15.0, help="warping band half-width")
    p.add_argument("--twdtw-alpha", type=float, default=0.1)
    p.add_argument("--twdtw-beta", type=float, default=50.0)
    p.add_argument("--vector-mode", default="pair", choices=["pair", "segment"])


def _dataset_args(p):
    p.add_argument("--dataset", required=True, help="observations CSV (preprocessed)")
    p.add_argument("--labels", help="labels CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phenowarp", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write synthetic observation files for two years")
    _common(p)
    p.add_argument("--scenario", default="S4", choices=sorted(SCENARIOS))
    p.add_argument("--n-per-class", type=int, default=100)
    p.add_argument("--cloud-fraction", type=float, default=0.0)

    p = sub.add_parser("preprocess", help="fill gaps, smooth and resample to a common grid")
    _common(p)
    p.add_argument("--observations", required=True)
    p.add_argument("--labels")
    p.add_argument("--index", default="MSAVI", choices=[k.value for k in IndexKind])
    p.add_argument("--smoothing", default="sg", choices=["sg", "sigmoid", "none"])
    p.add_argument("--sg-window", type=int, default=5)
    p.add_argument("--sg-order", type=int, default=2)
    p.add_argument("--grid-step", type=float, default=1.0)

    p = sub.add_parser("classify", help="run the replicated classification experiment")
    _common(p)
    _dataset_args(p)
    _warp_args(p)
    p.add_argument("--train-year", type=int, required=True)
    p.add_argument("--test-year", type=int, required=True)
    p.add_argument("--k", type=int, default=50, help="training samples per class")
    p.add_argument("--replications", type=int, default=100)
    p.add_argument("--mode", default="nearest_neighbor",
                   choices=["nearest_neighbor", "median_template"])
    p.add_argument("--window", type=_window_arg, default=None,
                   help="restrict series to 'o1,o2' (partial-series mode)")
    p.add_argument("--window-file", help="window.json written by select-window")

    p = sub.add_parser("select-window", help="discriminative window from class medians")
    _common(p)
    _dataset_args(p)
    p.add_argument("--train-year", type=int, required=True)
    p.add_argument("--policy", default="min_length", choices=["min_length", "union"])
    p.add_argument("--eps1", type=float, default=WindowPolicy.eps1)
    p.add_argument("--eps2", type=float, default=WindowPolicy.eps2)
    p.add_argument("--smoothing-width", type=int, default=WindowPolicy.smoothing)
    p.add_argument("--run-length", type=int, default=WindowPolicy.run_length)
    p.add_argument("--band-days", type=float, default=15.0)

    p = sub.add_parser("evaluate", help="metrics of a predictions file against labels")
    _common(p)
    p.add_argument("--predictions", required=True, help="CSV field_id,year,predicted")
    p.add_argument("--labels", required=True)

    p = sub.add_parser("distance", help="print cost matrices for two fields")
    p.add_argument("--config", help="flat key = value config file")
    _dataset_args(p)
    _warp_args(p)
    p.add_argument("--a", required=True, help="first field as FIELD_ID[:YEAR]")
    p.add_argument("--b", required=True, help="second field as FIELD_ID[:YEAR]")
    return parser


def _parse(argv: Optional[List[str]]):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # the config file is read before the full parse so that it can also
    # supply options that are otherwise required
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    subparsers = parser._subparsers._group_actions[0].choices
    if known.config and command in subparsers:
        sub = subparsers[command]
        actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
        defaults = {}
        for key, text in read_config(known.config).items():
            if key not in actions:
                raise ConfigError(f"unknown config key {key!r} for command {command}")
            action = actions[key]
            try:
                value = action.type(text) if action.type else text
            except (ValueError, argparse.ArgumentTypeError):
                raise ConfigError(f"invalid value {text!r} for {key}") from None
            if action.choices and value not in action.choices:
                raise ConfigError(f"invalid value {text!r} for {key}")
            defaults[key] = value
            action.required = False
        sub.set_defaults(**defaults)
    return parser.parse_args(argv)


# ---------------------------------------------------------------------------
# helpers


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _dump_json(path, obj):
    _write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _manifest(args, extra=None):
    config = {
        k: (list(v) if isinstance(v, tuple) else v)
        for k, v in sorted(vars(args).items())
        if k not in ("config", "out")
    }
    out = {"command": args.command, "config": config, "seed": getattr(args, "seed", None),
           "version": __version__}
    if extra:
        out.update(extra)
    return out


def _load_samples(args) -> List[FieldSample]:
    rows = parse_observations(args.dataset)
    labels = parse_labels(args.labels) if getattr(args, "labels", None) else {}
    return build_field_samples(rows, labels, IndexKind.MSAVI)


def _warp(args) -> WarpConfig:
    return WarpConfig(
        measure=args.measure,
        band_days=args.band_days,
        twdtw_alpha=args.twdtw_alpha,
        twdtw_beta=args.twdtw_beta,
        vector_mode=args.vector_mode,
    )


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    out = _ensure_dir(args.out)
    sc = SCENARIOS[args.scenario]
    if args.cloud_fraction:
        from dataclasses import replace

        sc = replace(sc, cloud_fraction=args.cloud_fraction)
    year_a, year_b = generate_dataset(
        n_per_class=args.n_per_class, scenario_b=sc, seed=args.seed
    )
    labels = {}
    for name, year in (("year1.csv", year_a), ("year2.csv", year_b)):
        buf = io.StringIO()
        write_observations(samples_to_rows(year), buf)
        _write(os.path.join(out, name), buf.getvalue())
        labels.update({s.key: s.label for s in year})
    buf = io.StringIO()
    write_labels(labels, buf)
    _write(os.path.join(out, "labels.csv"), buf.getvalue())
    _dump_json(os.path.join(out, "manifest.json"), _manifest(args))
    print(f"wrote {len(year_a) + len(year_b)} synthetic fields to {out}")
    return 0


def cmd_preprocess(args) -> int:
    out = _ensure_dir(args.out)
    rows = parse_observations(args.observations)
    labels = parse_labels(args.labels) if args.labels else {}
    samples = build_field_samples(rows, labels, args.index)
    calendars: Dict[int, set] = {}
    for s in samples:
        calendars.setdefault(s.year, set()).update(s.series.days.tolist())
    grid = common_grid([sorted(c) for _, c in sorted(calendars.items())], args.grid_step)

    kept, dropped, filled = [], [], 0
    for s in samples:
        try:
            series = prepare(s.series, grid, args.smoothing, args.sg_window, args.sg_order)
        except (UnfillableError, CoverageError) as exc:
            dropped.append({"field_id": s.field_id, "year": s.year, "reason": str(exc)})
            continue
        filled += int((~s.series.clear_mask).sum())
        kept.append(FieldSample(s.field_id, s.year, series, s.label))

    buf = io.StringIO()
    write_observations(samples_to_rows(kept), buf)
    _write(os.path.join(out, "dataset.csv"), buf.getvalue())
    if labels:
        buf = io.StringIO()
        write_labels({s.key: s.label for s in kept if s.label is not None}, buf)
        _write(os.path.join(out, "labels.csv"), buf.getvalue())
    report = {
        "filled_gaps": filled,
        "grid": {"t_l": grid.t_l, "t_u": grid.t_u, "step": grid.step, "n_days": len(grid)},
        "n_samples": len(kept),
        "dropped": dropped,
    }
    _dump_json(os.path.join(out, "preprocess_report.json"), report)
    _dump_json(os.path.join(out, "manifest.json"), _manifest(args))
    for d in dropped:
        logger.warning("dropped %s/%s: %s", d["field_id"], d["year"], d["reason"])
    print(f"{len(kept)} samples on grid [{grid.t_l:g}, {grid.t_u:g}], {filled} gaps filled")
    return 0


def cmd_classify(args) -> int:
    out = _ensure_dir(args.out)
    window = args.window
    if args.window_file:
        with open(args.window_file, encoding="utf-8") as fh:
            window = tuple(json.load(fh)["window"])
    cfg = ExperimentConfig(
        warp=_warp(args),
        train_year=args.train_year,
        test_year=args.test_year,
        k=args.k,
        replications=args.replications,
        seed=args.seed,
        mode=args.mode,
        window=window,
        threads=args.threads,
    )
    result = run_experiment(cfg, _load_samples(args))
    buf = io.StringIO()
    result.report.to_json(buf)
    _write(os.path.join(out, "metrics.json"), buf.getvalue())
    buf = io.StringIO()
    result.mean_confusion.to_csv(buf)
    _write(os.path.join(out, "confusion.csv"), buf.getvalue())
    _dump_json(os.path.join(out, "manifest.json"), _manifest(args, {"window": window}))
    print(
        f"{cfg.warp.measure.value}: OA={result.report.overall_accuracy:.4f} "
        f"kappa={result.report.kappa:.4f} over {cfg.replications} replications"
    )
    return 0


def cmd_select_window(args) -> int:
    out = _ensure_dir(args.out)
    samples = [s for s in _load_samples(args) if s.year == args.train_year]
    policy = WindowPolicy(
        mode=args.policy, eps1=args.eps1, eps2=args.eps2,
        smoothing=args.smoothing_width, run_length=args.run_length,
    )
    result = select_window(samples, policy, WarpConfig(measure="DTW", band_days=args.band_days))
    doc = {
        "pivot": result.pivot,
        "window": list(result.window),
        "policy": policy.mode.value,
        "no_plateau": result.no_plateau,
        "per_pair": [
            {"classes": list(k), "window": list(w)} for k, w in sorted(result.per_pair.items())
        ],
    }
    _dump_json(os.path.join(out, "window.json"), doc)
    buf = io.StringIO()
    write_score_curve(result.scores, buf)
    _write(os.path.join(out, "score_curve.csv"), buf.getvalue())
    _dump_json(os.path.join(out, "manifest.json"), _manifest(args))
    print(f"pivot {result.pivot:g}, window [{result.window[0]:g}, {result.window[1]:g}]")
    return 0


def cmd_evaluate(args) -> int:
    out = _ensure_dir(args.out)
    cm, report = evaluate_predictions(read_predictions(args.predictions), parse_labels(args.labels))
    buf = io.StringIO()
    report.to_json(buf)
    _write(os.path.join(out, "metrics.json"), buf.getvalue())
    buf = io.StringIO()
    cm.to_csv(buf)
    _write(os.path.join(out, "confusion.csv"), buf.getvalue())
    _dump_json(os.path.join(out, "manifest.json"), _manifest(args))
    print(f"OA={report.overall_accuracy:.4f} kappa={report.kappa:.4f}")
    return 0


def _find(samples, ref):
    fid, _, year = ref.partition(":")
    hits = [s for s in samples if s.field_id == fid and (not year or s.year == int(year))]
    if not hits:
        raise PhenowarpError(f"field {ref!r} not found in dataset")
    if len(hits) > 1:
        raise PhenowarpError(f"field {ref!r} is ambiguous; add :YEAR")
    return hits[0]


def cmd_distance(args) -> int:
    samples = _load_samples(args)
    a, b = _find(samples, args.a), _find(samples, args.b)
    cfg = _warp(args)
    with np.printoptions(precision=4, suppress=True, linewidth=120):
        if cfg.measure is Measure.SAM:
            from .distance import sam

            print(f"SAM distance: {sam(a.series, b.series)!r}")
            return 0
        cm = cost_matrices(a.series, b.series, cfg)
        print("psi:")
        print(cm.psi)
        print("D:")
        print(cm.acc)
    if not np.isfinite(cm.distance):
        print("no finite warping path within the band")
        return 1
    print(f"{cfg.measure.value} distance: {cm.distance!r}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "preprocess": cmd_preprocess,
    "classify": cmd_classify,
    "select-window": cmd_select_window,
    "evaluate": cmd_evaluate,
    "distance": cmd_distance,
}


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = _parse(argv)
        return COMMANDS[args.command](args)
    except (PhenowarpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
