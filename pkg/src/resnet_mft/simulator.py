"""Monte Carlo simulation of finite-width random residual networks.

Every random tensor is drawn from a generator keyed by
``(seed, run, layer, role)``, so results do not depend on the order in
which runs execute or on the number of worker threads.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np

from .errors import DivergentVarianceWarning, DomainError
from .recurrence import BackwardTrajectory, ForwardTrajectory, NetConfig

BACKWARD_MODES = ("independent", "tied")
LAST_GRADS = ("sign", "gaussian")
SAMPLERS = ("dense", "gram")
THREADS_ENV = "RESNET_MFT_THREADS"

# tensor roles in the RNG key
INPUT, W, B, V, A, W_BACK, V_BACK, GRAD = range(8)


@dataclass(frozen=True)
class SimSpec:
    """Monte Carlo settings.

    Attributes
    ----------
    width : int
        Layer width ``N >= 2``.
    runs : int
        Number of independent networks.
    seed : int
        Root seed; fully determines every sampled tensor.
    backward_mode : str
        ``"independent"`` draws a fresh copy of ``w`` and ``v`` for the
        backward pass; ``"tied"`` reuses the forward weights.
    last_grad : str
        ``"sign"`` for i.i.d. uniform signs, ``"gaussian"`` for i.i.d. N(0, 1).
    sampler : str
        ``"dense"`` samples full weight matrices. ``"gram"`` samples the
        products of fresh Gaussian weights with the current vectors directly
        from their exact conditional law, which costs O(N) per layer. It
        cannot be combined with tied backward weights.
    """

    width: int
    runs: int
    seed: int = 0
    backward_mode: str = "independent"
    last_grad: str = "sign"
    sampler: str = "dense"

    def __post_init__(self):
        if int(self.width) != self.width or self.width < 2:
            raise DomainError("width must be an integer >= 2")
        if int(self.runs) != self.runs or self.runs < 1:
            raise DomainError("runs must be an integer >= 1")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an integer in [0, 2**64)")
        if self.backward_mode not in BACKWARD_MODES:
            raise DomainError(f"backward_mode must be one of {BACKWARD_MODES}")
        if self.last_grad not in LAST_GRADS:
            raise DomainError(f"last_grad must be one of {LAST_GRADS}")
        if self.sampler not in SAMPLERS:
            raise DomainError(f"sampler must be one of {SAMPLERS}")
        if self.sampler == "gram" and self.backward_mode == "tied":
            raise DomainError("the gram sampler needs independent backward weights")

    @classmethod
    def from_dict(cls, d: dict) -> "SimSpec":
        known = {"width", "runs", "seed", "backward_mode", "last_grad", "sampler"}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown sim keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {"width": self.width, "runs": self.runs, "seed": self.seed,
                "backward_mode": self.backward_mode, "last_grad": self.last_grad,
                "sampler": self.sampler}


@dataclass(frozen=True)
class LayerStats:
    """Per-run, per-layer samples of empirical quantities.

    ``samples[name]`` has shape ``(runs, depth + 1)``; entries that do not
    exist at a layer (for example ``q`` at layer 0) are NaN.
    """

    samples: Dict[str, np.ndarray]
    width: int
    runs: int
    overflow: bool = False
    diverging_variance: bool = False

    @property
    def depth(self) -> int:
        return next(iter(self.samples.values())).shape[1] - 1

    @property
    def quantities(self):
        return tuple(self.samples)

    def mean(self, name: str) -> np.ndarray:
        return self.samples[name].mean(axis=0)

    def std(self, name: str) -> np.ndarray:
        return self.samples[name].std(axis=0, ddof=1 if self.runs > 1 else 0)

    def stderr(self, name: str) -> np.ndarray:
        return self.std(name) / math.sqrt(self.runs)

    def rows(self):
        """Long-format rows ``(layer, quantity, mean, std, runs, width)``."""
        for name in self.samples:
            m, s = self.mean(name), self.std(name)
            for l in range(self.depth + 1):
                yield (l, name, m[l], s[l], self.runs, self.width)


def default_threads() -> int:
    """Worker count from the environment, defaulting to 1."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if n < 1:
        raise DomainError(f"{THREADS_ENV} must be >= 1")
    return n


def keyed_rng(seed: int, run: int, layer: int, role: int) -> np.random.Generator:
    """Independent generator for one tensor, keyed by its coordinates."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run, layer, role)))


def make_input_pair(width: int, p0: float, e0: float,
                    seed: Union[int, np.random.Generator] = 0):
    """Two inputs with ``|x|^2/N = |x'|^2/N = p0`` and ``x.x' / (N p0) = e0``.

    A random Gaussian direction ``u1`` is drawn, a second direction is made
    orthogonal to it by Gram-Schmidt, and ``x'`` is obtained by rotating
    ``x`` by ``arccos(e0)`` in that plane.
    """
    width = int(width)
    p0 = float(p0)
    e0 = float(e0)
    if not (p0 > 0 and math.isfinite(p0)):
        raise DomainError("p0 must be positive")
    if not abs(e0) <= 1:
        raise DomainError("e0 must lie in [-1, 1]")
    if width < 1 or (width < 2 and abs(e0) != 1):
        raise DomainError("width >= 2 is needed to realize the angle")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.standard_normal((2, width))
    u1 = g[0] / np.linalg.norm(g[0])
    scale = math.sqrt(width * p0)
    x = scale * u1
    if e0 == 1.0:
        return x, x.copy()
    if e0 == -1.0:
        return x, -x
    u2 = g[1] - np.dot(g[1], u1) * u1
    u2 -= np.dot(u2, u1) * u1  # second pass for orthogonality to rounding level
    u2 /= np.linalg.norm(u2)
    return x, scale * (e0 * u1 + math.sqrt((1.0 - e0) * (1.0 + e0)) * u2)


def _gaussian_pair(rng, var, x, y, same):
    # rows of M @ [x y] for M with i.i.d. N(0, var/N) entries, sampled exactly
    n = x.shape[0]
    z = rng.standard_normal((2, n))
    gxx = np.dot(x, x)
    sd = math.sqrt(var / n)
    if gxx == 0.0:
        return np.zeros(n), (np.zeros(n) if same else sd * math.sqrt(np.dot(y, y)) * z[1])
    r = math.sqrt(gxx)
    hx = sd * r * z[0]
    if same:
        return hx, hx
    gxy = np.dot(x, y)
    l10 = gxy / r
    l11 = math.sqrt(max(np.dot(y, y) - l10 * l10, 0.0))
    return hx, sd * (l10 * z[0] + l11 * z[1])


class _Net:
    """Weight source for one run: dense matrices or exact pair sampling."""

    def __init__(self, cfg: NetConfig, sim: SimSpec, run: int):
        self.cfg, self.sim, self.run = cfg, sim, run
        self.n = sim.width

    def rng(self, layer, role):
        return keyed_rng(self.sim.seed, self.run, layer, role)

    def matrix(self, layer, role, var):
        return self.rng(layer, role).standard_normal((self.n, self.n)) * math.sqrt(var / self.n)

    def bias(self, layer, role, var):
        return self.rng(layer, role).standard_normal(self.n) * math.sqrt(var)

    def apply_pair(self, layer, role, var, x, y, same):
        if self.sim.sampler == "gram":
            return _gaussian_pair(self.rng(layer, role), var, x, y, same)
        m = self.matrix(layer, role, var)
        hx = m @ x
        return hx, (hx if same else m @ y)


def _layer_step(net, l, x, y, same):
    cfg = net.cfg
    act = cfg.activation
    hx, hy = net.apply_pair(l, W, cfg.var_w, x, y, same)
    b = net.bias(l, B, cfg.var_b)
    hx = hx + b
    hy = hx if same else hy + b
    fx = act.apply(hx)
    fy = fx if same else act.apply(hy)
    if cfg.arch == "FRN":
        ux, uy = net.apply_pair(l, V, cfg.var_v, fx, fy, same)
        a = net.bias(l, A, cfg.var_a)
        nx = ux + x + a
        ny = nx if same else uy + y + a
    else:
        nx = fx + x
        ny = nx if same else fy + y
    return hx, hy, fx, nx, ny


_FWD = ("p", "p_prime", "q", "gamma", "lambda", "e", "phi_mean")


def _forward_run(cfg, sim, p0, e0, run):
    n = sim.width
    L = cfg.depth
    out = {k: np.full(L + 1, np.nan) for k in _FWD}
    x, y = make_input_pair(n, p0, e0, keyed_rng(sim.seed, run, 0, INPUT))
    same = e0 == 1.0
    if same:
        y = x
    net = _Net(cfg, sim, run)

    def record(l, x, y):
        px, py, g = np.dot(x, x) / n, np.dot(y, y) / n, np.dot(x, y) / n
        out["p"][l], out["p_prime"][l], out["gamma"][l] = px, py, g
        out["e"][l] = g / math.sqrt(px * py)

    record(0, x, y)
    last = L
    with np.errstate(over="ignore", invalid="ignore"):
        for l in range(1, L + 1):
            hx, hy, fx, x, y = _layer_step(net, l, x, y, same)
            out["q"][l] = np.dot(hx, hx) / n
            out["lambda"][l] = np.dot(hx, hy) / n
            out["phi_mean"][l] = fx.mean()
            record(l, x, y)
            # squared norms overflow before the coordinates do
            if not all(math.isfinite(out[k][l]) for k in _FWD):
                last = l - 1
                break
    return out, last


def _run_all(fn, runs, threads):
    threads = default_threads() if threads is None else int(threads)
    if threads <= 1 or runs == 1:
        return [fn(r) for r in range(runs)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(runs)))


def _collect(results, names, width, runs, **flags):
    last = min(r[1] for r in results)
    samples = {}
    for k in names:
        arr = np.stack([r[0][k][: last + 1] for r in results])
        arr.flags.writeable = False
        samples[k] = arr
    overflow = last < len(results[0][0][names[0]]) - 1
    return LayerStats(samples, width, runs, overflow, **flags)


def simulate_forward(cfg: NetConfig, sim: SimSpec, p0: float, e0: float,
                     threads: Optional[int] = None) -> LayerStats:
    """Propagate an input pair through ``sim.runs`` random networks.

    Records ``p`` and ``p_prime`` (squared lengths of the two images),
    ``q`` (pre-activation squared length), ``gamma`` and ``lambda`` (dot
    products), ``e = gamma / sqrt(p p_prime)`` and ``phi_mean`` (the
    coordinate average of ``phi(h)`` for the first input).
    """
    res = _run_all(lambda r: _forward_run(cfg, sim, p0, e0, r), sim.runs, threads)
    return _collect(res, _FWD, sim.width, sim.runs)


_BWD = ("p", "daleth", "chi_b", "chi_w", "chi_v", "chi_a")


def _backward_run(cfg, sim, p0, run):
    n = sim.width
    L = cfg.depth
    act = cfg.activation
    frn = cfg.arch == "FRN"
    tied = sim.backward_mode == "tied"
    out = {k: np.full(L + 1, np.nan) for k in _BWD}
    x, _ = make_input_pair(n, p0, 1.0, keyed_rng(sim.seed, run, 0, INPUT))
    net = _Net(cfg, sim, run)
    xs = [x]
    hs = [None]
    out["p"][0] = np.dot(x, x) / n
    last = L
    with np.errstate(over="ignore", invalid="ignore"):
        for l in range(1, L + 1):
            h, _, _, x, _ = _layer_step(net, l, x, x, True)
            pl = np.dot(x, x) / n
            if not math.isfinite(pl):
                last = l - 1
                break
            xs.append(x)
            hs.append(h)
            out["p"][l] = pl
        if last < L:
            return out, last
        rng = net.rng(L, GRAD)
        if sim.last_grad == "sign":
            g = rng.integers(0, 2, n) * 2.0 - 1.0
        else:
            g = rng.standard_normal(n)
        gradient_overflow = False
        for l in range(L, 0, -1):
            gg = np.dot(g, g) / n
            out["daleth"][l] = gg
            h = hs[l]
            if frn:
                if sim.sampler == "gram":
                    dphi = net.rng(l, V_BACK).standard_normal(n) * math.sqrt(cfg.var_v * gg)
                else:
                    v = net.matrix(l, V if tied else V_BACK, cfg.var_v)
                    dphi = v.T @ g
                dh = act.deriv(h) * dphi
                fh = act.apply(h)
                out["chi_v"][l] = gg * np.dot(fh, fh) / n
                out["chi_a"][l] = gg
            else:
                dh = act.deriv(h) * g
            dd = np.dot(dh, dh) / n
            out["chi_b"][l] = dd
            out["chi_w"][l] = dd * np.dot(xs[l - 1], xs[l - 1]) / n
            if sim.sampler == "gram":
                g = g + net.rng(l, W_BACK).standard_normal(n) * math.sqrt(cfg.var_w * dd)
            else:
                w = net.matrix(l, W if tied else W_BACK, cfg.var_w)
                g = g + w.T @ dh
        out["daleth"][0] = np.dot(g, g) / n
    return out, last


def simulate_backward(cfg: NetConfig, sim: SimSpec, p0: float,
                      threads: Optional[int] = None) -> LayerStats:
    """Forward a single input, then backpropagate a random top-layer gradient.

    Records ``daleth`` (mean squared gradient per activation coordinate) and
    the per-parameter mean squared gradients ``chi_b, chi_w, chi_v, chi_a``
    (the last two only for FRN, NaN otherwise). The top-layer gradient
    follows ``sim.last_grad`` so that ``daleth[L]`` has expectation 1.
    """
    diverging = False
    a = cfg.activation
    if a.kind == "alpha_relu" and a.alpha <= 0.75:
        diverging = True
        warnings.warn(f"alpha = {a.alpha}: empirical gradient variance diverges",
                      DivergentVarianceWarning, stacklevel=2)
    res = _run_all(lambda r: _backward_run(cfg, sim, p0, r), sim.runs, threads)
    return _collect(res, _BWD, sim.width, sim.runs, diverging_variance=diverging)


# ---------------------------------------------------------------------------
# comparison against the recurrences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantityReport:
    name: str
    z: np.ndarray
    max_abs_z: float
    frac_within_3: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "max_abs_z": self.max_abs_z,
                "frac_within_3": self.frac_within_3, "passed": self.passed,
                "z": [None if not math.isfinite(v) else float(v) for v in self.z]}


@dataclass(frozen=True)
class CompareReport:
    quantities: Dict[str, QuantityReport]
    level: float

    @property
    def passed(self) -> bool:
        return all(q.passed for q in self.quantities.values())

    def __getitem__(self, name) -> QuantityReport:
        return self.quantities[name]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "level": self.level,
                "quantities": {k: v.to_dict() for k, v in self.quantities.items()}}


def _theory_series(theory):
    if isinstance(theory, ForwardTrajectory):
        return {"p": theory.p, "gamma": theory.gamma, "q": theory.q}
    if isinstance(theory, BackwardTrajectory):
        out = {"daleth": theory.daleth, "chi_b": theory.chi_b, "chi_w": theory.chi_w}
        if np.any(np.isfinite(theory.chi_v)):
            out["chi_v"] = theory.chi_v
            out["chi_a"] = theory.chi_a
        return out
    raise DomainError("theory must be a ForwardTrajectory or BackwardTrajectory")


def compare(theory: Union[ForwardTrajectory, BackwardTrajectory], empirical: LayerStats,
            level: float = 0.95) -> CompareReport:
    """Per-layer z-scores ``(mean - theory) / (std / sqrt(runs))``.

    Layers where the empirical quantity is deterministic (zero spread and
    equal to theory up to rounding) get ``z = 0``. A quantity passes when at
    least ``level`` of its layers have ``|z| <= 3``.
    """
    if theory.depth != empirical.depth:
        raise DomainError(f"depth mismatch: theory {theory.depth}, empirical {empirical.depth}")
    reports = {}
    for name, th in _theory_series(theory).items():
        if name not in empirical.samples:
            continue
        m = empirical.mean(name)
        se = empirical.stderr(name)
        ok = np.isfinite(th) & np.isfinite(m)
        diff = m - th
        tiny = 1e-12 * np.maximum(np.abs(th), np.abs(m))
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(np.abs(diff) <= tiny, 0.0, diff / se)
        z = np.where(ok, z, np.nan)
        zz = np.abs(z[ok])
        frac = float(np.mean(zz <= 3.0)) if zz.size else 1.0
        reports[name] = QuantityReport(name, z, float(zz.max()) if zz.size else 0.0,
                                       frac, frac >= level)
    return CompareReport(reports, level)
