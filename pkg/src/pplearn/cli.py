"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .audit import audit_all, audit_loss
from .config import ConfigError, build_data, build_train_config, load_config, resolve
from .datagen import TabularFormatError, load_tabular
from .experiments import parse_axis, run_experiment, run_grid, write_run
from .metrics import bucket_accuracy, hmt_split, hmt_thresholds
from .model import ModelParams, evaluate
from .schedules import alpha_at, mix_bounds_at, progress_at, q_at
from .trainer import DivergenceError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--seed", type=int, help="shorthand for --set train.seed=N")


def build_parser():
    parser = _Parser(prog="pplearn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pplearn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train one configuration")
    _common(p)
    p.add_argument("--out", required=True, help="run directory")

    p = sub.add_parser("grid", help="run a cartesian grid of configurations")
    _common(p)
    p.add_argument("--axis", action="append", default=[], metavar="KEY=V1,V2", help="grid axis; 'method' is allowed")
    p.add_argument("--seeds", type=int, help="add an axis train.seed=0..N-1")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("schedule-dump", help="print the phase schedules per epoch as CSV")
    _common(p)
    p.add_argument("--lambda-x", type=float, default=0.5)
    p.add_argument("--last", type=int, help="last epoch to emit (default: train.epochs - 1)")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("loss-check", help="finite-difference audit of the loss gradients")
    _common(p)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--all", action="store_true", help="audit every family and CRI variant")
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("eval", help="evaluate a trained run directory")
    p.add_argument("--run", required=True, help="directory written by 'train'")
    p.add_argument("--data", help="labelled CSV to evaluate on (default: the run's validation set)")
    p.add_argument("--header", action="store_true", help="the CSV has a header row")
    return parser


def _resolved(args):
    file_values = load_config(args.config) if args.config else {}
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"train.seed={args.seed}")
    return file_values, overrides


def cmd_train(args):
    file_values, overrides = _resolved(args)
    out = run_experiment(file_values, overrides)
    write_run(out, args.out)
    final = out.record.final
    print(f"final accuracy {final.val_acc:.4f} (head {final.head_acc:.4f}, "
          f"medium {final.medium_acc:.4f}, tail {final.tail_acc:.4f})")
    return EXIT_OK


def cmd_grid(args):
    file_values, overrides = _resolved(args)
    axes = [parse_axis(a) for a in args.axis]
    if args.seeds:
        axes.append(("train.seed", [str(s) for s in range(args.seeds)]))
    if not axes:
        raise ConfigError("grid needs at least one --axis or --seeds")
    os.makedirs(args.out, exist_ok=True)
    cells, cells_text, agg_text = run_grid(file_values, overrides, axes, args.jobs, args.out)
    with open(os.path.join(args.out, "cells.csv"), "w") as fh:
        fh.write(cells_text)
    with open(os.path.join(args.out, "aggregate.csv"), "w") as fh:
        fh.write(agg_text)
    failed = [c for c in cells if c.error]
    for c in failed:
        print(f"{c.name} failed: {c.error}", file=sys.stderr)
    print(f"{len(cells) - len(failed)}/{len(cells)} cells finished")
    return EXIT_NUMERIC if failed else EXIT_OK


def schedule_rows(cfg, lambda_x=0.5, last=None):
    tc = build_train_config(cfg)
    sched = tc.phase
    last = tc.epochs - 1 if last is None else last
    rows = []
    for e in range(last + 1):
        lam0, lam1 = mix_bounds_at(sched, e, lambda_x)
        q = q_at(sched, e) if sched.delta <= 1 else float("nan")
        rows.append((e, progress_at(sched, e), alpha_at(sched, e), q, lam0, lam1))
    return rows


def cmd_schedule_dump(args):
    file_values, overrides = _resolved(args)
    cfg = resolve(file_values, overrides)
    lines = ["epoch,f,alpha,q,lambda0,lambda1"]
    for e, *vals in schedule_rows(cfg, args.lambda_x, args.last):
        lines.append(",".join([str(e)] + [repr(float(v)) for v in vals]))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_loss_check(args):
    file_values, overrides = _resolved(args)
    cfg = resolve(file_values, overrides)
    loss_cfg = build_train_config(cfg).loss
    seed = cfg["train.seed"]
    if args.all:
        results = audit_all(loss_cfg, args.cases, seed, args.corrupt)
    else:
        results = [audit_loss(loss_cfg, args.cases, seed, args.corrupt)]
    ok = True
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.label:14s} cases={r.cases} skipped={r.skipped} max_abs_dev={r.worst_abs:.3e} "
              f"worst_ratio={r.worst_ratio:.3f} {status}")
        ok &= r.passed
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_eval(args):
    cfg_path = os.path.join(args.run, "config.txt")
    cfg = resolve(load_config(cfg_path))
    with np.load(os.path.join(args.run, "params.npz")) as arrays:
        params = ModelParams.from_arrays(dict(arrays))
    train_ds, validation = build_data(cfg)
    if args.data:
        validation = load_tabular(args.data, has_header=args.header, num_classes=params.n_classes)
    result = evaluate(params, validation)
    counts = train_ds.class_counts
    head_min, tail_max = hmt_thresholds(counts.max(), cfg["metrics.head_frac"], cfg["metrics.tail_frac"])
    buckets = bucket_accuracy(result.per_class, hmt_split(counts, head_min, tail_max))
    doc = {
        "overall": result.overall,
        "balanced": result.balanced,
        "per_class": [float(v) for v in result.per_class],
        "buckets": buckets,
        "confusion": result.confusion.tolist(),
    }
    print(json.dumps(doc, indent=2, sort_keys=True, allow_nan=True))
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "grid": cmd_grid,
    "schedule-dump": cmd_schedule_dump,
    "loss-check": cmd_loss_check,
    "eval": cmd_eval,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DivergenceError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, TabularFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
