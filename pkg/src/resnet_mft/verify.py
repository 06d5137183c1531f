"""Registry of numerical self-checks run by ``resnet-mft verify``.

Each check returns ``(passed, details)``. Profiles select checks by tag;
``default`` runs everything.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import asymptotics as asy
from . import transforms as tf
from .nonlin import Activation
from .recurrence import NetConfig, backward, forward
from .simulator import SimSpec, compare, simulate_backward, simulate_forward

# Variances used for the figure-one style setups.
FIG1 = dict(var_v=1.5, var_a=0.5, var_w=1.69, var_b=0.49)
# Small-variance tanh FRN configs (var_v, var_a, var_w, var_b) for the gradient law.
SMALL_VARIANCE = ((0.25, 0.25, 0.25, 0.25), (0.5, 0.5, 0.5, 0.5), (0.1, 0.1, 0.1, 0.1))
E0_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    seconds: float
    details: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "seconds": round(self.seconds, 3),
                "details": self.details}


_REGISTRY: Dict[str, Tuple[Tuple[str, ...], Callable[[], Tuple[bool, dict]]]] = {}


def check(*tags):
    def deco(fn):
        _REGISTRY[fn.__name__] = (tags, fn)
        return fn
    return deco


def checks_for(profile: str) -> List[str]:
    if profile == "default":
        return list(_REGISTRY)
    names = [n for n, (tags, _) in _REGISTRY.items() if profile in tags]
    if not names:
        raise KeyError(f"unknown profile {profile!r}")
    return names


def _rel(a, b):
    return abs(a - b) / abs(b)


def _fig1(act, depth, arch="FRN"):
    return NetConfig(arch, act, FIG1["var_w"], FIG1["var_b"], FIG1["var_v"], FIG1["var_a"], depth)


# ---------------------------------------------------------------------------
# transforms and kernels
# ---------------------------------------------------------------------------

@check("transforms", "quick")
def closed_form_v():
    worst = 0.0
    for a in (0.51, 0.6, 0.75, 0.9, 1.0):
        for q in (0.1, 1.0, 10.0):
            v = tf.v_transform(Activation.alpha_relu(a), q).value
            worst = max(worst, _rel(v, tf.v_psi_closed(a, q)))
    return worst <= 1e-8, {"max_rel_error": worst, "tol": 1e-8}


@check("transforms")
def kernel_factorization():
    worst = 0.0
    for a in (0.6, 0.75, 0.9, 1.0):
        for c in (-0.5, 0.2, 0.6, 0.95):
            q = 1.7
            w = tf.w_transform(Activation.alpha_relu(a), q, c).value
            ref = tf.v_psi_closed(a, q) * tf.j_alpha(a, c).value
            worst = max(worst, _rel(w, ref))
    return worst <= 1e-5, {"max_rel_error": worst, "tol": 1e-5}


@check("transforms")
def bessel_representation():
    pts = ((0.7, math.pi / 3), (1.0, 0.5), (0.6, 1.2), (1.5, 2.0), (2.5, math.pi / 4), (0.9, 2.8))
    worst = 0.0
    for a, th in pts:
        worst = max(worst, abs(tf.j_alpha(a, math.cos(th)).value - tf.j_alpha_via_bessel(a, th).value))
    return worst <= 1e-5, {"max_abs_error": worst, "tol": 1e-5}


def _jrec_tail(a, c):
    # (a-1)^2 (2a-1)^-1 (2a-3)^-1 (1-c^2) JJ_{a-2}(c); at a = 3/2 the pole of
    # 1/(2a-3) cancels the zero of 1/c_{a-2}, so use the unnormalized kernel
    if 2 * a - 3 == 0:
        return (a - 1) ** 2 * (1 - c * c) * tf.j_alpha_unnormalized(a - 2, c).value / (
            2 * math.pi * tf.c_alpha(a))
    k = (a - 1) ** 2 / ((2 * a - 1) * (2 * a - 3))
    return k * (1 - c * c) * tf.j_alpha(a - 2, c).value


@check("kernel-identities", "transforms")
def jalpha_recurrence():
    worst = 0.0
    for a in (1.5, 2.5):
        for c in (0.2, 0.7):
            lhs = tf.j_alpha(a, c).value
            rhs = c * tf.j_alpha(a - 1, c).value + _jrec_tail(a, c)
            worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-5, {"max_abs_error": worst, "tol": 1e-5}


@check("kernel-identities", "transforms")
def jalpha_derivative():
    h = 1e-5
    worst = 0.0
    for a, c in ((0.8, 0.4), (0.6, 0.1), (1.0, 0.5), (1.5, 0.3), (0.9, -0.5)):
        fd = (tf.j_alpha(a, c + h).value - tf.j_alpha(a, c - h).value) / (2 * h)
        worst = max(worst, abs(fd - tf.j_alpha_deriv(a, c)))
    return worst <= 1e-5, {"max_abs_error": worst, "tol": 1e-5}


@check("kernel-identities", "transforms")
def lalpha_recurrence():
    worst = 0.0
    for a, th in ((2.5, math.pi / 4), (2.2, 1.0), (3.0, 2.0)):
        L = lambda b: tf.bessel_moment(b, th).value
        rhs = ((2 * a - 1) * math.cos(th) * L(a - 1) + (a - 1) ** 2 * L(a - 2)) / math.sin(th) ** 2
        worst = max(worst, _rel(L(a), rhs))
    return worst <= 1e-5, {"max_rel_error": worst, "tol": 1e-5}


@check("transforms", "quick")
def vdot_tanh_lower_bound():
    vals = {q: tf.v_dot_transform(Activation.tanh(), q).value for q in (0.1, 1.0, 10.0, 100.0)}
    ok = all(v >= 1.0 / math.sqrt(4 * q + 1) for q, v in vals.items())
    return ok, {"values": {repr(q): v for q, v in vals.items()}}


@check("transforms")
def jalpha_monotone_convex():
    cs = np.linspace(0.0, 1.0, 100)
    worst_first, worst_second = 0.0, 0.0
    for a in (0.6, 0.8, 1.0):
        j = np.array([tf.j_alpha(a, c).value for c in cs])
        worst_first = min(worst_first, float(np.diff(j).min()))
        worst_second = min(worst_second, float(np.diff(j, 2).min()))
    ok = worst_first >= -1e-7 and worst_second >= -1e-7
    return ok, {"min_first_difference": worst_first, "min_second_difference": worst_second}


# ---------------------------------------------------------------------------
# recurrences and asymptotics
# ---------------------------------------------------------------------------

@check("recurrence", "quick")
def relu_exactness():
    rng = np.random.default_rng(20240601)
    worst_p, worst_ratio = 0.0, 0.0
    for _ in range(10):
        vv, va, vw, vb = rng.uniform(0.1, 2.0, 4)
        cfg = NetConfig("FRN", Activation.alpha_relu(1.0), vw, vb, vv, va, depth=40)
        f = forward(cfg, 1.0, 1.0)
        for l in range(41):
            worst_p = max(worst_p, _rel(f.p[l], asy.relu_p_closed(cfg, 1.0, l)))
        b = backward(cfg, f)
        ratio = b.daleth[:-1] / b.daleth[1:]
        worst_ratio = max(worst_ratio, float(np.max(np.abs(ratio / (1 + 0.5 * vv * vw) - 1))))
    ok = worst_p <= 1e-12 and worst_ratio <= 1e-12
    return ok, {"max_rel_error_p": worst_p, "max_rel_error_ratio": worst_ratio, "tol": 1e-12}


@check("asymptotics")
def tanh_rrn_linear_growth():
    ratios = {}
    for vw in (0.5, 1.0, 2.0):
        cfg = NetConfig("RRN", Activation.tanh(), vw, 0.5, depth=10 ** 4)
        ratios[repr(vw)] = forward(cfg, 1.0, 1.0).p[10 ** 4] / 10 ** 4
    ok = all(0.99 <= r <= 1.01 for r in ratios.values())
    return ok, {"p_over_l_at_1e4": ratios, "band": [0.99, 1.01]}


@check("asymptotics", "quick")
def tanh_frn_fixed_point():
    fp = asy.tanh_frn_fixed_point(FIG1["var_v"], FIG1["var_a"])
    deltas = {}
    for rho in (0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0):
        deltas[repr(rho)] = asy.tanh_frn_fixed_point(1.0, rho * rho).exponent
    lo = 1 - 2 / math.pi
    in_band = all(lo - 1e-15 <= d < 0.5 for d in deltas.values())
    ok = fp.residual < 1e-12 and in_band
    return ok, {"e_star": fp.e_star, "delta_star": fp.exponent, "residual": fp.residual,
                "delta_star_by_rho": deltas}


@check("asymptotics")
def tanh_frn_e_exponent():
    fp = asy.tanh_frn_fixed_point(FIG1["var_v"], FIG1["var_a"])
    target = -fp.exponent - 1
    cfg = _fig1(Activation.tanh(), 2000)
    slopes = {}
    for e0 in E0_GRID:
        e = forward(cfg, 1.0, e0).e
        d = np.abs(np.diff(e, prepend=np.nan))
        slopes[repr(e0)] = asy.fit_exponent(d, 400, 2000)
    ok = all(abs(s - target) <= 0.05 for s in slopes.values())
    return ok, {"target": target, "slopes": slopes, "tol": 0.05}


@check("asymptotics")
def tanh_grad_law():
    devs = {}
    for vv, va, vw, vb in SMALL_VARIANCE:
        cfg = NetConfig("FRN", Activation.tanh(), vw, vb, vv, va, depth=4000)
        b = backward(cfg, forward(cfg, 1.0, 1.0))
        for m in (1000, 2000):
            emp = math.log(b.daleth[m] / b.daleth[4000])
            devs[f"{(vv, va, vw, vb)} m={m}"] = emp - asy.tanh_grad_log_ratio(cfg, 4000, m)
    ok = all(abs(d) < 2 for d in devs.values())
    return ok, {"deviations": devs, "band": 2}


@check("asymptotics")
def alpha_relu_forward_exponents():
    slopes, ratio = {}, None
    for a in (0.55, 0.7):
        cfg = _fig1(Activation.alpha_relu(a), 2000)
        p = forward(cfg, 1.0, 1.0).p
        slopes[repr(a)] = (asy.fit_exponent(p, 500, 2000), 1 / (1 - a))
        if a == 0.55:
            K1 = asy.alpha_relu_p_coefficients(cfg)["K1"]
            ratio = p[2000] / 2000 ** (1 / (1 - a)) / K1
    ok = all(abs(s - t) <= 0.05 for s, t in slopes.values()) and abs(ratio - 1) <= 0.1
    return ok, {"slopes_vs_target": slopes, "K1_ratio_0.55": ratio}


@check("asymptotics")
def alpha_relu_backward_exponents():
    fits = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for a in (0.8, 0.9):
            cfg = _fig1(Activation.alpha_relu(a), 2000)
            b = backward(cfg, forward(cfg, 1.0, 1.0))
            fits[repr(a)] = (asy.fit_exponent(b.daleth[0] / b.daleth, 500, 2000),
                             asy.grad_exponent_R(a))
    spots = (asy.grad_exponent_R(0.75), asy.grad_exponent_R(2 / 3))
    ok = (all(abs(f - t) <= 0.1 for f, t in fits.values())
          and abs(spots[0] - 4.5) < 1e-12 and abs(spots[1] - 4.0) < 1e-12)
    return ok, {"fits_vs_R": fits, "R(3/4)": spots[0], "R(2/3)": spots[1]}


@check("asymptotics")
def relu_e_convergence():
    cfg = _fig1(Activation.alpha_relu(1.0), 60)
    slopes = {}
    for e0 in E0_GRID:
        f = forward(cfg, 1.0, e0)
        slopes[repr(e0)] = asy.fit_exponent(1 - f.e, 20, 60)
    ok = all(abs(s + 2) <= 0.2 for s in slopes.values())
    return ok, {"target": -2.0, "slopes": slopes, "tol": 0.2}


@check("asymptotics", "quick")
def fixed_point_scale_invariance():
    worst = 0.0
    for vv, va in ((1.5, 0.5), (1.0, 0.1), (0.3, 2.0)):
        ref = asy.tanh_frn_fixed_point(vv, va)
        for k in (1e-3, 0.7, 3.0, 1e4):
            r = asy.tanh_frn_fixed_point(k * vv, k * va)
            worst = max(worst, abs(r.e_star - ref.e_star), abs(r.exponent - ref.exponent))
    return worst <= 1e-12, {"max_abs_difference": worst}


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@check("monte-carlo")
def monte_carlo_forward():
    cfg = _fig1(Activation.tanh(), 200)
    stats = simulate_forward(cfg, SimSpec(1000, 20, seed=0), 1.0, 0.5)
    rep = compare(forward(cfg, 1.0, 0.5), stats)
    fr = {k: rep[k].frac_within_3 for k in ("p", "gamma")}
    return all(v >= 0.9 for v in fr.values()), {"frac_within_3": fr, "required": 0.9}


@check("monte-carlo")
def monte_carlo_backward():
    cfg = _fig1(Activation.tanh(), 50)
    stats = simulate_backward(cfg, SimSpec(250, 25, seed=0), 1.0)
    rep = compare(backward(cfg, forward(cfg, 1.0, 1.0)), stats)
    fr = rep["daleth"].frac_within_3
    return fr >= 0.85, {"frac_within_3": fr, "required": 0.85}


@check("monte-carlo", "quick")
def cauchy_schwarz_and_determinism():
    cfg = _fig1(Activation.tanh(), 20)
    sim = SimSpec(64, 4, seed=7)
    a = simulate_forward(cfg, sim, 1.0, 0.3, threads=1)
    b = simulate_forward(cfg, sim, 1.0, 0.3, threads=3)
    same = all(np.array_equal(a.samples[k], b.samples[k], equal_nan=True) for k in a.samples)
    g, p, pp = a.samples["gamma"], a.samples["p"], a.samples["p_prime"]
    cs = bool(np.all(np.abs(g) <= np.sqrt(p * pp)))
    return same and cs, {"thread_count_invariant": same, "cauchy_schwarz": cs}


def run(profile: str = "default", c_alpha_scale: float = 1.0) -> dict:
    """Run the checks of ``profile`` and return a JSON-ready report."""
    results = []
    ctx = tf.corrupted_c_alpha(c_alpha_scale)
    with ctx:
        for name in checks_for(profile):
            fn = _REGISTRY[name][1]
            t = time.perf_counter()
            try:
                passed, details = fn()
            except Exception as exc:  # a crashing check is a failed check
                passed, details = False, {"error": f"{type(exc).__name__}: {exc}"}
            results.append(CheckResult(name, bool(passed), time.perf_counter() - t, details))
    return {"profile": profile, "c_alpha_scale": c_alpha_scale,
            "passed": all(r.passed for r in results),
            "checks": [r.to_dict() for r in results]}
