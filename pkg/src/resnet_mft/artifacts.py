"""CSV and JSON writers for trajectories, simulation statistics and reports.

Floats are written with ``repr`` so that reading a file back with
``float()`` recovers every value bit for bit (``nan`` and ``inf`` included).
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .recurrence import BACKWARD_HEADER, FORWARD_HEADER, BackwardTrajectory, ForwardTrajectory
from .simulator import LayerStats

STATS_HEADER = ("layer", "quantity", "mean", "std", "runs", "width")


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])
    return path


def read_csv(path):
    """Header and rows of a CSV written by :func:`write_csv`; numeric cells become floats."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        rows = []
        for row in r:
            out = []
            for cell in row:
                try:
                    out.append(float(cell))
                except ValueError:
                    out.append(cell)
            rows.append(tuple(out))
    return header, rows


def write_forward(path, traj: ForwardTrajectory):
    return write_csv(path, FORWARD_HEADER, traj.rows())


def write_backward(path, traj: BackwardTrajectory):
    return write_csv(path, BACKWARD_HEADER, traj.rows())


def write_stats(path, stats: LayerStats):
    return write_csv(path, STATS_HEADER, stats.rows())


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def write_json(path, obj):
    """Write ``obj`` as indented JSON; non-finite floats become ``null``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path
