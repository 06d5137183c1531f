"""Hyperparameter grids over two of (var_w, var_v, var_a, alpha, depth).

Each grid point reports ``p_L``, ``s_L``, ``e_L``, ``log(daleth[0] / daleth[L])``
and ``log(chi_w[1] / chi_w[L])`` from the recurrences. When ``depth`` is an
axis, the recurrences run once at the largest depth and smaller depths are
read off the same trajectory: the forward pass does not depend on ``L`` and
the backward pass is linear in its top value.
"""
from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import MAX_GRID_POINTS, SweepOptions
from .errors import ConfigError, DomainError
from .nonlin import Activation
from .recurrence import NetConfig, backward, forward
from .simulator import default_threads

QUANTITIES = ("p_L", "s_L", "e_L", "log_daleth_ratio", "log_chi_w_ratio", "overflow")


@dataclass(frozen=True)
class SweepResult:
    axis_names: Tuple[str, str]
    axis_values: Tuple[Tuple[float, ...], Tuple[float, ...]]
    values: Dict[str, np.ndarray]  # quantity -> array of shape (len(axis0), len(axis1))
    contours: Dict[str, Dict[str, list]]

    def rows(self):
        """Long format ``(axis0, axis1, quantity, value)``."""
        a0, a1 = self.axis_values
        for i, x in enumerate(a0):
            for j, y in enumerate(a1):
                for name, arr in self.values.items():
                    yield (x, y, name, arr[i, j])

    @property
    def header(self):
        return (*self.axis_names, "quantity", "value")


def _point_config(base: NetConfig, point: Dict[str, float]) -> NetConfig:
    kw = {}
    for k in ("var_w", "var_v", "var_a"):
        if k in point:
            if k != "var_w" and base.arch == "RRN":
                raise ConfigError(f"RRN configs have no {k} axis")
            kw[k] = point[k]
    if "alpha" in point:
        a = base.activation
        if not a.is_alpha_relu:
            raise ConfigError("alpha axis needs an alpha-ReLU activation")
        kw["activation"] = Activation(a.kind, point["alpha"], a.eps)
    if "depth" in point:
        kw["depth"] = int(point["depth"])
    try:
        return base.replace(**kw)
    except DomainError as exc:
        raise ConfigError(f"grid point {point}: {exc}") from exc


def _evaluate(cfg: NetConfig, depths, p0, e0):
    out = {k: np.full(len(depths), np.nan) for k in QUANTITIES}
    fwd = forward(cfg, p0, e0)
    for i, L in enumerate(depths):
        if L <= fwd.depth:
            out["p_L"][i] = fwd.p[L]
            out["s_L"][i] = fwd.s[L]
            out["e_L"][i] = fwd.e[L]
        out["overflow"][i] = float(L > fwd.depth)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f1 = fwd if e0 == 1.0 else forward(cfg, p0, 1.0)
            bwd = backward(cfg, f1, 1.0)
    except DomainError:
        return out
    for i, L in enumerate(depths):
        if L <= bwd.depth and not bwd.overflow:
            out["log_daleth_ratio"][i] = math.log(bwd.daleth[0] / bwd.daleth[L])
            out["log_chi_w_ratio"][i] = math.log(bwd.chi_w[1] / bwd.chi_w[L])
    return out


def _crossings(xs, ys, vals, level):
    pts = []
    for i in range(len(xs)):
        row = vals[i]
        for j in range(len(ys) - 1):
            a, b = row[j], row[j + 1]
            if not (math.isfinite(a) and math.isfinite(b)) or a == b:
                continue
            if (a - level) * (b - level) <= 0:
                t = (level - a) / (b - a)
                pts.append((xs[i], ys[j] + t * (ys[j + 1] - ys[j])))
    return pts


def _default_levels(arr, n=5):
    v = arr[np.isfinite(arr)]
    if v.size < 2 or v.min() == v.max():
        return ()
    lo, hi = np.quantile(v, [0.1, 0.9])
    return tuple(float(x) for x in np.linspace(lo, hi, n))


def run_sweep(base: NetConfig, opts: SweepOptions, threads: Optional[int] = None) -> SweepResult:
    """Evaluate the grid described by ``opts`` around the base config."""
    if opts.size > MAX_GRID_POINTS:
        raise ConfigError(f"grid has {opts.size} points; the limit is {MAX_GRID_POINTS}")
    names = tuple(n for n, _ in opts.axes)
    values = tuple(v for _, v in opts.axes)
    shape = tuple(len(v) for v in values)
    result = {k: np.full(shape, np.nan) for k in QUANTITIES}

    # one recurrence run per combination of the non-depth axes
    if "depth" in names:
        d_ax = names.index("depth")
        o_ax = 1 - d_ax
        depths = [int(x) for x in values[d_ax]]
        groups = [((o_ax, i),) for i in range(shape[o_ax])]
    else:
        d_ax = None
        depths = [base.depth]
        groups = [((0, i), (1, j)) for i, j in itertools.product(range(shape[0]), range(shape[1]))]

    def job(group):
        point = {names[ax]: values[ax][i] for ax, i in group}
        if d_ax is not None:
            point["depth"] = max(depths)
        cfg = _point_config(base, point)
        return group, _evaluate(cfg, depths, opts.p0, opts.e0)

    n = default_threads() if threads is None else int(threads)
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            outs = list(ex.map(job, groups))
    else:
        outs = [job(g) for g in groups]

    for group, out in outs:
        for k in QUANTITIES:
            if d_ax is None:
                (_, i), (_, j) = group
                result[k][i, j] = out[k][0]
            else:
                (ax, i), = group
                idx = [None, None]
                idx[ax] = i
                for di in range(len(depths)):
                    idx[d_ax] = di
                    result[k][tuple(idx)] = out[k][di]

    if base.activation.kind == "tanh":
        if "var_w" in names and "depth" in names:
            vw = np.asarray(values[names.index("var_w")])
            L = np.asarray(values[names.index("depth")])
            grid = np.outer(vw, L) if names[0] == "var_w" else np.outer(L, vw)
            result["sigma_w_sqrt_L"] = np.sqrt(grid)
            result["var_w_L"] = grid
        default_q = ("log_daleth_ratio",)
    else:
        default_q = ("log_chi_w_ratio", "s_L")

    contours = {}
    for q in tuple(opts.levels) or default_q:
        if q not in result:
            raise ConfigError(f"cannot draw contours of unknown quantity {q!r}")
        levels = opts.levels.get(q) or _default_levels(result[q])
        contours[q] = {repr(float(lv)): [dict(zip(names, p))
                                         for p in _crossings(values[0], values[1], result[q], lv)]
                       for lv in levels}
    return SweepResult(names, values, result, contours)
