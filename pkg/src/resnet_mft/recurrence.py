"""Layerwise mean-field recurrences for reduced and full residual networks.

Reduced (RRN):  ``x = phi(w x_prev + b) + x_prev``.
Full (FRN):     ``x = v phi(w x_prev + b) + x_prev + a``.

The forward pass tracks squared lengths ``p, q`` and dot products
``gamma, lambda`` of two inputs; the backward pass tracks mean squared
gradients with respect to activations (``daleth``) and parameters (``chi_*``).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import transforms as tf
from .errors import DivergentVarianceWarning, DomainError
from .nonlin import Activation

ARCHS = ("RRN", "FRN")


@dataclass(frozen=True)
class NetConfig:
    """Architecture, activation, initialization variances and depth.

    RRN configs leave ``var_v`` and ``var_a`` as ``None``.
    """

    arch: str
    activation: Activation
    var_w: float
    var_b: float
    var_v: Optional[float] = None
    var_a: Optional[float] = None
    depth: int = 1

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise DomainError(f"arch must be one of {ARCHS}")
        if not isinstance(self.activation, Activation):
            raise DomainError("activation must be an Activation")
        for name in ("var_w", "var_b"):
            _check_var(name, getattr(self, name))
        if self.arch == "FRN":
            for name in ("var_v", "var_a"):
                _check_var(name, getattr(self, name))
        else:
            if self.var_v is not None or self.var_a is not None:
                raise DomainError("RRN configs carry no var_v / var_a")
            if not self.activation.is_antisymmetric:
                raise DomainError("RRN recurrences hold only for an antisymmetric activation (tanh)")
        if int(self.depth) != self.depth or self.depth < 1:
            raise DomainError("depth must be an integer >= 1")

    @property
    def sv2(self) -> float:
        """Effective ``sigma_v^2`` (1 for RRN)."""
        return 1.0 if self.arch == "RRN" else self.var_v

    @property
    def sa2(self) -> float:
        """Effective ``sigma_a^2`` (0 for RRN)."""
        return 0.0 if self.arch == "RRN" else self.var_a

    def replace(self, **kw) -> "NetConfig":
        d = dict(arch=self.arch, activation=self.activation, var_w=self.var_w,
                 var_b=self.var_b, var_v=self.var_v, var_a=self.var_a, depth=self.depth)
        d.update(kw)
        return NetConfig(**d)

    @classmethod
    def from_dict(cls, d: dict) -> "NetConfig":
        d = dict(d)
        known = {"arch", "activation", "var_w", "var_b", "var_v", "var_a", "depth"}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown net keys: {sorted(extra)}")
        missing = {"arch", "activation", "var_w", "var_b", "depth"} - set(d)
        if missing:
            raise DomainError(f"missing net keys: {sorted(missing)}")
        act = d["activation"]
        if isinstance(act, str):
            act = {"kind": act}
        return cls(arch=d["arch"], activation=Activation.from_dict(act),
                   var_w=_num(d["var_w"]), var_b=_num(d["var_b"]),
                   var_v=None if d.get("var_v") is None else _num(d["var_v"]),
                   var_a=None if d.get("var_a") is None else _num(d["var_a"]),
                   depth=d["depth"])

    def to_dict(self) -> dict:
        d = {"arch": self.arch, "activation": self.activation.to_dict(),
             "var_w": self.var_w, "var_b": self.var_b}
        if self.arch == "FRN":
            d["var_v"] = self.var_v
            d["var_a"] = self.var_a
        d["depth"] = self.depth
        return d


def _num(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise DomainError(f"expected a number, got {x!r}")
    return float(x)


def _check_var(name, v):
    if v is None or not (math.isfinite(v) and v >= 0):
        raise DomainError(f"{name} must be a finite number >= 0, got {v}")


def _frozen(a):
    a = np.asarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ForwardTrajectory:
    """Per-layer forward quantities, index ``l = 0..depth``.

    ``q[0]`` and ``lam[0]`` are NaN because hidden pre-activations start at
    layer 1. ``overflow`` marks trajectories truncated at the last finite
    layer.
    """

    p: np.ndarray
    q: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray
    e: np.ndarray
    s: np.ndarray
    overflow: bool = False

    @property
    def depth(self) -> int:
        return len(self.p) - 1

    def rows(self):
        for l in range(len(self.p)):
            yield (l, self.p[l], self.q[l], self.gamma[l], self.lam[l], self.e[l], self.s[l])


FORWARD_HEADER = ("layer", "p", "q", "gamma", "lambda", "e", "s")
BACKWARD_HEADER = ("layer", "daleth", "chi_b", "chi_w", "chi_v", "chi_a")


@dataclass(frozen=True)
class BackwardTrajectory:
    """Per-layer gradient quantities, index ``l = 0..depth``.

    ``chi_*[0]`` is NaN; ``chi_v`` and ``chi_a`` are all NaN for RRN.
    """

    daleth: np.ndarray
    chi_b: np.ndarray
    chi_w: np.ndarray
    chi_v: np.ndarray
    chi_a: np.ndarray
    overflow: bool = False
    diverging_variance: bool = False

    @property
    def depth(self) -> int:
        return len(self.daleth) - 1

    def rows(self):
        for l in range(len(self.daleth)):
            yield (l, self.daleth[l], self.chi_b[l], self.chi_w[l], self.chi_v[l], self.chi_a[l])


class _Kernels:
    """V, W and V-dot evaluators for one activation and quadrature choice."""

    def __init__(self, a: Activation, spec: Optional[tf.QuadratureSpec]):
        self.a = a
        self.fast = spec is None or spec.scheme == "auto"
        self.spec = spec

    def v(self, q):
        if self.fast:
            return tf.v_value(self.a, q)
        return tf.v_transform(self.a, q, self.spec).value

    def w(self, q, c):
        if self.fast:
            return tf.w_value(self.a, q, c)
        return tf.w_transform(self.a, q, c, self.spec).value

    def vdot(self, q):
        if self.fast:
            return tf.v_dot_value(self.a, q)
        return tf.v_dot_transform(self.a, q, self.spec).value


def forward(cfg: NetConfig, p0: float, e0: float,
            spec: Optional[tf.QuadratureSpec] = None) -> ForwardTrajectory:
    """Iterate the forward recurrences from ``p[0] = p0``, ``gamma[0] = e0 p0``.

    Parameters
    ----------
    cfg : NetConfig
    p0 : float
        Initial mean squared length, ``> 0``.
    e0 : float
        Initial correlation in ``[-1, 1]``.
    spec : QuadratureSpec, optional
        ``None`` (default) uses the fast evaluators: closed forms for the
        alpha-ReLU and the adapted rules otherwise.

    Examples
    --------
    >>> from resnet_mft.nonlin import Activation
    >>> cfg = NetConfig("FRN", Activation.alpha_relu(1.0), 1.69, 0.49, 1.5, 0.5, depth=3)
    >>> round(float(forward(cfg, 1.0, 1.0).p[1]), 12)
    3.135
    """
    p0 = float(p0)
    e0 = float(e0)
    if not (p0 > 0 and math.isfinite(p0)):
        raise DomainError("p0 must be positive and finite")
    if not abs(e0) <= 1.0:
        raise DomainError("e0 must lie in [-1, 1]")
    k = _Kernels(cfg.activation, spec)
    sw2, sb2, sv2, sa2 = cfg.var_w, cfg.var_b, cfg.sv2, cfg.sa2
    L = cfg.depth
    p = np.full(L + 1, np.nan)
    q = np.full(L + 1, np.nan)
    g = np.full(L + 1, np.nan)
    lam = np.full(L + 1, np.nan)
    p[0] = p0
    g[0] = e0 * p0
    last = L
    overflow = False
    with np.errstate(over="ignore", invalid="ignore"):
        for l in range(1, L + 1):
            try:
                ql = sw2 * p[l - 1] + sb2
                ll = sw2 * g[l - 1] + sb2
                if not (math.isfinite(ql) and math.isfinite(ll)):
                    raise OverflowError
                vl = k.v(ql)
                if ll == ql:
                    wl = vl
                elif ql == 0.0:
                    wl = 0.0
                else:
                    wl = k.w(ql, min(1.0, max(-1.0, ll / ql)))
                pl = sv2 * vl + sa2 + p[l - 1]
                gl = sv2 * wl + sa2 + g[l - 1]
                if not (math.isfinite(pl) and math.isfinite(gl)):
                    raise OverflowError
            except OverflowError:
                last = l - 1
                overflow = True
                break
            q[l], lam[l], p[l], g[l] = ql, ll, pl, gl
    sl = slice(0, last + 1)
    p, q, g, lam = p[sl], q[sl], g[sl], lam[sl]
    return ForwardTrajectory(_frozen(p), _frozen(q), _frozen(g), _frozen(lam),
                             _frozen(g / p), _frozen(p - g), overflow)


def backward(cfg: NetConfig, fwd: ForwardTrajectory, daleth_L: float = 1.0,
             spec: Optional[tf.QuadratureSpec] = None) -> BackwardTrajectory:
    """Iterate the gradient recurrences from the top layer of ``fwd`` downward.

    The top layer is ``fwd.depth``, which is shorter than ``cfg.depth`` when
    the forward pass overflowed.

    Raises
    ------
    DomainError
        For the alpha-ReLU with ``alpha <= 1/2``, where V of the derivative
        diverges.
    """
    a = cfg.activation
    daleth_L = float(daleth_L)
    if not (daleth_L > 0 and math.isfinite(daleth_L)):
        raise DomainError("daleth_L must be positive and finite")
    diverging = False
    if a.kind == "alpha_relu":
        if a.alpha <= 0.5:
            raise DomainError("gradient recurrence needs alpha > 1/2")
        if a.alpha <= 0.75:
            diverging = True
            warnings.warn(f"alpha = {a.alpha}: mean gradients are finite but their "
                          "variance diverges", DivergentVarianceWarning, stacklevel=2)
    k = _Kernels(a, spec)
    L = fwd.depth
    sw2, sv2 = cfg.var_w, cfg.sv2
    frn = cfg.arch == "FRN"
    d = np.full(L + 1, np.nan)
    cb = np.full(L + 1, np.nan)
    cw = np.full(L + 1, np.nan)
    cv = np.full(L + 1, np.nan)
    ca = np.full(L + 1, np.nan)
    d[L] = daleth_L
    with np.errstate(over="ignore"):
        for l in range(L, 0, -1):
            vd = k.vdot(fwd.q[l])
            cb[l] = sv2 * d[l] * vd
            cw[l] = cb[l] * fwd.p[l - 1]
            if frn:
                cv[l] = d[l] * k.v(fwd.q[l])
                ca[l] = d[l]
            d[l - 1] = (sv2 * sw2 * vd + 1.0) * d[l]
    overflow = not bool(np.all(np.isfinite(d)))
    return BackwardTrajectory(_frozen(d), _frozen(cb), _frozen(cw), _frozen(cv),
                              _frozen(ca), overflow, diverging)
