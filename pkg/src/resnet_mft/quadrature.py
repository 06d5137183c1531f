"""Low-level quadrature rules.

All rules return plain ``(nodes, weights)`` arrays so callers can evaluate
integrands in a single vectorized pass.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import NumericalError

# Standard-normal tails beyond this many standard deviations are below 1e-32.
T_MAX = 12.0


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


@lru_cache(maxsize=None)
def gauss_hermite(n: int):
    """Probabilists' Gauss-Hermite rule normalized to the N(0, 1) density."""
    x, w = np.polynomial.hermite_e.hermegauss(n)
    w = w / math.sqrt(2.0 * math.pi)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


@lru_cache(maxsize=None)
def _jacobi_unit(beta: float, n: int):
    # Rule for int_0^1 f(t) dt when f(t) ~ t**beta * smooth, returned in the
    # plain form sum w_k f(t_k) by dividing the Jacobi weight back out.
    x, w = special.roots_jacobi(n, 0.0, beta)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w / (x + 1.0) ** beta
    t.flags.writeable = False
    wt.flags.writeable = False
    return t, wt


@lru_cache(maxsize=None)
def _graded_unit(order: int, levels: int):
    # Geometric mesh on [0, 1] with breakpoints 2**-k; handles bounded
    # integrands with rough behaviour at the origin.
    br = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1, dtype=float)])
    t, w = composite(br, order)
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


def tip_rule(beta, order: int = 10, n_jacobi: int = 24, levels: int = 40):
    """Nodes and weights on ``[0, 1]`` for an integrand singular at 0.

    Parameters
    ----------
    beta : float or None
        Known algebraic exponent of the integrand at the origin. When given a
        Gauss-Jacobi rule absorbs ``t**beta``; otherwise a geometric mesh is
        used.
    """
    if beta is None:
        return _graded_unit(order, levels)
    if beta == 0.0:
        x, w = gauss_legendre(n_jacobi)
        return 0.5 * (x + 1.0), 0.5 * w
    return _jacobi_unit(float(beta), n_jacobi)


def composite(breaks, order: int = 10):
    """Composite Gauss-Legendre rule over consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    half = 0.5 * (breaks[1:] - breaks[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def panels(a: float, b: float, width: float, order: int = 10):
    """Composite Gauss-Legendre rule on ``[a, b]`` with panels at most ``width`` wide."""
    n = max(1, int(math.ceil((b - a) / width - 1e-12)))
    return composite(np.linspace(a, b, n + 1), order)


def half_line_rule(beta, order: int = 10, t_max: float = T_MAX, width: float = 0.5):
    """Rule for ``int_0^t_max f(t) dt`` with a possibly singular origin.

    The unit interval is handled by :func:`tip_rule`; the remainder uses
    uniform Gauss-Legendre panels.
    """
    t0, w0 = tip_rule(beta, order)
    t1, w1 = panels(1.0, t_max, width, order)
    return np.concatenate([t0, t1]), np.concatenate([w0, w1])


def normal_rule(q: float, order: int = 10, n_hermite: int = 64):
    """Rule for ``E[g(z)]``, ``z ~ N(0, q)``, when ``g`` is smooth at unit scale.

    Small variances use Gauss-Hermite in the standardized variable. Larger
    variances integrate over ``z in [-20, 20]`` with Gauss-Legendre panels
    and the Gaussian density folded into the weights, which is accurate as
    long as ``g`` decays like ``exp(-2|z|)`` or faster.
    """
    if q <= 0.25:
        x, w = gauss_hermite(n_hermite)
        return math.sqrt(q) * x, w
    sd = math.sqrt(q)
    half = min(20.0, T_MAX * sd)
    z, w = panels(-half, half, 0.5 if sd < 1.0 else 1.0, order)
    return z, w * np.exp(-z * z / (2.0 * q)) / math.sqrt(2.0 * math.pi * q)


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-12, max_depth: int = 50):
    """Adaptive Simpson quadrature of a scalar function.

    Returns
    -------
    value, est_abs_error : float
        Richardson-corrected integral and the accumulated error estimate.
    """
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = simpson(fa, fm, fb, a, b)
    total = 0.0
    err = 0.0
    # explicit stack avoids Python recursion limits
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a_, b_, fa_, fm_, fb_, whole_, tol_, depth = stack.pop()
        m_ = 0.5 * (a_ + b_)
        lm, rm = 0.5 * (a_ + m_), 0.5 * (m_ + b_)
        flm, frm = f(lm), f(rm)
        left = simpson(fa_, flm, fm_, a_, m_)
        right = simpson(fm_, frm, fb_, m_, b_)
        delta = left + right - whole_
        if not math.isfinite(delta):
            raise NumericalError("non-finite integrand in adaptive Simpson")
        if abs(delta) <= 15.0 * tol_ or depth >= max_depth:
            if depth >= max_depth and abs(delta) > 15.0 * tol_:
                raise NumericalError("adaptive Simpson hit max depth", abs(delta) / 15.0)
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
        else:
            stack.append((a_, m_, fa_, flm, fm_, left, 0.5 * tol_, depth + 1))
            stack.append((m_, b_, fm_, frm, fb_, right, 0.5 * tol_, depth + 1))
    return total, err
