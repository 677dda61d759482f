"""Single runs and cartesian grids driven by flat configurations."""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import io
import itertools
import os

import numpy as np

from . import __version__
from .config import build_data, build_train_config, dump_config, requested_method, resolve
from .metrics import aggregate
from .trainer import DivergenceError, train

__all__ = ["RunOutput", "run_experiment", "write_run", "GridCell", "run_grid", "parse_axis"]

SUMMARY_FIELDS = ("final_acc", "final_head_acc", "final_medium_acc", "final_tail_acc", "best_acc")
SEED_KEYS = ("train.seed", "data.seed")


@dataclass
class RunOutput:
    config: dict
    method: str
    params: object
    record: object

    def header(self):
        return f"pplearn {__version__}\nmethod: {self.method}\nseed: {self.config['train.seed']}"

    def summary_json(self):
        return self.record.summary_json(
            version=__version__, method=self.method, seed=self.config["train.seed"]
        )


def run_experiment(file_values=None, overrides=()):
    cfg = resolve(file_values, overrides)
    train_cfg = build_train_config(cfg)
    data, validation = build_data(cfg)
    params, record = train(train_cfg, data, validation)
    return RunOutput(cfg, requested_method(file_values, overrides), params, record)


def write_run(out, run_dir):
    os.makedirs(run_dir, exist_ok=True)
    with open(os.path.join(run_dir, "config.txt"), "w") as fh:
        fh.write(dump_config(out.config, header=out.header()))
    with open(os.path.join(run_dir, "epochs.csv"), "w") as fh:
        fh.write(out.record.to_csv())
    with open(os.path.join(run_dir, "summary.json"), "w") as fh:
        fh.write(out.summary_json())
    np.savez(os.path.join(run_dir, "params.npz"), **out.params.to_arrays())


def parse_axis(text):
    """``key=v1,v2,...``; integer ranges may be written ``a..b`` (inclusive)."""
    if "=" not in text:
        raise ValueError(f"axis {text!r} must look like key=v1,v2")
    key, raw = text.split("=", 1)
    values = []
    for part in raw.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            values.extend(str(v) for v in range(int(lo), int(hi) + 1))
        elif part:
            values.append(part)
    if not values:
        raise ValueError(f"axis {key!r} has no values")
    return key.strip(), values


@dataclass
class GridCell:
    index: int
    assignment: tuple
    summary: dict = field(default_factory=dict)
    error: str = ""

    @property
    def name(self):
        return f"cell{self.index:04d}"


def _cell_overrides(assignment):
    return [f"{k}={v}" for k, v in assignment]


def _run_cell(args):
    file_values, overrides, assignment = args
    try:
        out = run_experiment(file_values, list(overrides) + _cell_overrides(assignment))
    except (DivergenceError, FloatingPointError, ValueError) as exc:
        return None, str(exc)
    return out, ""


def run_grid(file_values, overrides, axes, jobs=1, out_dir=None):
    """Run every combination of ``axes`` (a list of ``(key, values)``).

    Cells are numbered in ``itertools.product`` order. Returns the cells and
    the per-cell and aggregate tables as CSV text; per-run outputs go under
    ``out_dir/cells/`` when it is given.
    """
    # Validate every assignment before launching anything.
    combos = list(itertools.product(*[[(k, v) for v in vals] for k, vals in axes]))
    for assignment in combos:
        resolve(file_values, list(overrides) + _cell_overrides(assignment))
    cells = [GridCell(i, a) for i, a in enumerate(combos)]
    tasks = [(file_values, tuple(overrides), c.assignment) for c in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_run_cell, tasks))
    else:
        outputs = [_run_cell(t) for t in tasks]
    for cell, (out, err) in zip(cells, outputs):
        cell.error = err
        if out is not None:
            cell.summary = out.record.summary()
            if out_dir is not None:
                write_run(out, os.path.join(out_dir, "cells", cell.name))
    keys = [k for k, _ in axes]
    return cells, cells_csv(cells, keys), aggregate_csv(cells, keys)


def _fmt(v):
    return repr(float(v))


def cells_csv(cells, keys):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cell"] + keys + list(SUMMARY_FIELDS) + ["error"])
    for c in cells:
        vals = dict(c.assignment)
        metrics = [_fmt(c.summary[f]) if c.summary else "" for f in SUMMARY_FIELDS]
        w.writerow([c.name] + [vals[k] for k in keys] + metrics + [c.error])
    return buf.getvalue()


def aggregate_csv(cells, keys):
    """Mean and std over the seed axes for every other axis combination."""
    group_keys = [k for k in keys if k not in SEED_KEYS]
    groups = {}
    for c in cells:
        vals = dict(c.assignment)
        groups.setdefault(tuple(vals[k] for k in group_keys), []).append(c)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = group_keys + ["n_runs", "n_failed"]
    for f in SUMMARY_FIELDS:
        header += [f"{f}_mean", f"{f}_std"]
    w.writerow(header)
    for gkey, members in groups.items():
        ok = [c for c in members if c.summary]
        row = list(gkey) + [len(ok), len(members) - len(ok)]
        for f in SUMMARY_FIELDS:
            mean, std = aggregate([c.summary[f] for c in ok])
            row += [_fmt(mean), _fmt(std)]
        w.writerow(row)
    return buf.getvalue()
