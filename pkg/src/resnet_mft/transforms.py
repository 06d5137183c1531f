"""Gaussian integral transforms and the alpha-ReLU kernel.

``V phi(q) = E[phi(z)**2]`` with ``z ~ N(0, q)`` and
``W phi(q, c q) = E[phi(z) phi(z')]`` with unit-correlation-``c`` Gaussian
pairs of common variance ``q``. For the alpha-ReLU the kernel
``JJ_alpha(c) = W(q, c q) / V(q)`` has an integral representation over a
finite angle interval and a second one through the Bessel function ``K_0``;
both are implemented so they can be checked against each other.
"""
from __future__ import annotations

import math
import warnings
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import quadrature as qr
from .errors import DomainError, NumericalError
from .nonlin import Activation

SCHEMES = ("auto", "gauss_hermite", "adaptive_simpson")
C_CLAMP = 1.0 - 1e-9
_SQRT2PI = math.sqrt(2.0 * math.pi)
_KAPPA = math.sqrt(math.pi) / 2.0  # erf(KAPPA x) matches tanh to first order

# Multiplier applied to c_alpha; exists only so self-checks can be shown to
# catch a corrupted constant. Use ``corrupted_c_alpha`` to change it.
_C_ALPHA_SCALE = 1.0


@dataclass(frozen=True)
class QuadratureSpec:
    """How to evaluate V and W.

    Attributes
    ----------
    node_count : int
        Number of 1-D nodes for ``"gauss_hermite"`` (the 2-D rule uses
        ``node_count // 2`` per axis). Ignored by ``"auto"``.
    scheme : str
        ``"auto"`` picks a rule adapted to the activation: a split
        erf/remainder rule for tanh and kink-aware graded meshes with
        Gauss-Jacobi end panels for the alpha-ReLU families.
        ``"gauss_hermite"`` is the plain tensor rule. ``"adaptive_simpson"``
        is a slow scalar reference.
    tol : float
        Absolute tolerance for ``"adaptive_simpson"``.
    """

    node_count: int = 128
    scheme: str = "auto"
    tol: float = 1e-11

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < 8:
            raise DomainError("node_count must be an integer >= 8")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}")
        if not self.tol > 0:
            raise DomainError("tol must be positive")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class KernelValue:
    """A computed integral together with an absolute error estimate."""

    value: float
    est_abs_error: float

    def __post_init__(self):
        if not (math.isfinite(self.est_abs_error) and self.est_abs_error >= 0):
            raise NumericalError("invalid error estimate", self.est_abs_error)

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def c_alpha(alpha: float) -> float:
    """``c_alpha = 2**(alpha - 1) Gamma(alpha + 1/2) / sqrt(pi)``, so ``V psi_alpha(q) = c_alpha q**alpha``."""
    return _C_ALPHA_SCALE * 2.0 ** (alpha - 1.0) * math.gamma(alpha + 0.5) / math.sqrt(math.pi)


@contextmanager
def corrupted_c_alpha(scale: float):
    """Temporarily multiply :func:`c_alpha` by ``scale`` (mutation testing hook)."""
    global _C_ALPHA_SCALE
    old = _C_ALPHA_SCALE
    _C_ALPHA_SCALE = float(scale)
    try:
        yield
    finally:
        _C_ALPHA_SCALE = old


def _check_q(q, strict=False):
    q = float(q)
    if not math.isfinite(q) or q < 0 or (strict and q == 0):
        raise DomainError(f"variance must be {'>' if strict else '>='} 0 and finite, got {q}")
    return q


def _check_c(c):
    c = float(c)
    if not abs(c) <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {c}")
    return c


def v_psi_closed(alpha: float, q: float) -> float:
    """Closed form ``c_alpha q**alpha`` of V for the alpha-ReLU."""
    if not alpha > -0.5:
        raise DomainError("V psi_alpha diverges for alpha <= -1/2")
    q = _check_q(q)
    if q == 0.0:
        if alpha > 0:
            return 0.0
        raise DomainError("V psi_alpha(0) is undefined for alpha <= 0")
    return c_alpha(alpha) * q ** alpha


def v_dot_psi_closed(alpha: float, q: float) -> float:
    """Closed form ``alpha**2 c_{alpha-1} q**(alpha-1)`` of V for the alpha-ReLU derivative."""
    if not alpha > 0.5:
        raise DomainError("V of the alpha-ReLU derivative diverges for alpha <= 1/2")
    q = _check_q(q, strict=True)
    return alpha * alpha * c_alpha(alpha - 1.0) * q ** (alpha - 1.0)


def j1_closed(c: float) -> float:
    """Arc-cosine kernel of the ReLU, ``(sqrt(1-c^2) + (pi - arccos c) c) / pi``."""
    c = _check_c(c)
    return (math.sqrt((1.0 - c) * (1.0 + c)) + (math.pi - math.acos(c)) * c) / math.pi


# ---------------------------------------------------------------------------
# JJ_alpha through the finite angle integral
# ---------------------------------------------------------------------------

def _quad(f, a, b, **kw):
    kw.setdefault("limit", 200)
    out = integrate.quad(f, a, b, full_output=1, **kw)
    val, err = out[0], out[1]
    if len(out) > 3 and err > 1e-8 * max(1.0, abs(val)):
        raise NumericalError(f"quadrature did not converge: {out[3][:60]}", err)
    return val, err


def _angle_integral(alpha: float, c: float):
    """``Gamma(a+1) sin(t)**(2a+1) int_0^{pi/2} cos(eta)**a / (1 - cos t cos eta)**(1+a)``.

    Written as ``cos^a(eta) (sin^2 t / D)^(1+a) / sin t`` with
    ``D = (1 - c) + 2 c sin^2(eta/2)`` to avoid cancellation as ``c -> 1``.
    """
    one_m_c = 1.0 - c
    sin2 = one_m_c * (1.0 + c)
    sin_t = math.sqrt(sin2)
    theta = math.acos(c)

    def f(eta):
        d = one_m_c + 2.0 * c * math.sin(0.5 * eta) ** 2
        return math.cos(eta) ** alpha * (sin2 / d) ** (1.0 + alpha)

    pts = [p for p in (theta, 4.0 * theta, 16.0 * theta) if p < 0.5 * math.pi]
    val, err = _quad(f, 0.0, 0.5 * math.pi, points=pts or None,
                     epsabs=1e-15, epsrel=1e-13)
    g = math.gamma(alpha + 1.0) / sin_t
    return g * val, abs(g) * err


def j_alpha_unnormalized(alpha: float, c: float) -> KernelValue:
    """``K_alpha(c) = 2 pi c_alpha JJ_alpha(c)``, finite even where ``c_alpha`` is not.

    Useful in the two-step kernel recurrence at half-integer orders where
    ``c_{alpha-2}`` has a pole.
    """
    if not alpha > -1.0:
        raise DomainError("kernel integral needs alpha > -1")
    c = _check_c(c)
    if c == 1.0:
        if alpha <= -0.5:
            return KernelValue(math.inf, 0.0)
        return KernelValue(2.0 * math.pi * c_alpha(alpha), 0.0)
    if c == -1.0 and 2.0 * alpha + 1.0 > 0:
        return KernelValue(0.0, 0.0)
    v, e = _angle_integral(alpha, min(c, C_CLAMP))
    return KernelValue(v, e)


def j_alpha(alpha: float, c: float) -> KernelValue:
    """Normalized alpha-ReLU kernel ``JJ_alpha(c)``, with ``JJ_alpha(1) = 1``.

    Examples
    --------
    >>> round(j_alpha(1.0, 0.0).value * math.pi, 12)
    1.0
    """
    if not alpha > -1.0:
        raise DomainError("JJ_alpha needs alpha > -1")
    c = _check_c(c)
    if c == 1.0:
        return KernelValue(1.0, 0.0)
    if c == -1.0 and 2.0 * alpha + 1.0 > 0:
        return KernelValue(0.0, 0.0)
    v, e = _angle_integral(alpha, min(c, C_CLAMP))
    norm = 2.0 * math.pi * c_alpha(alpha)
    return KernelValue(v / norm, e / abs(norm))


def j_alpha_deriv(alpha: float, c: float) -> float:
    """Derivative ``d JJ_alpha / dc = alpha**2 / (2 alpha - 1) JJ_{alpha-1}(c)``."""
    if not alpha > 0:
        raise DomainError("derivative formula needs alpha > 0")
    if alpha == 0.5:
        raise DomainError("derivative formula has a pole at alpha = 1/2")
    if alpha == 1.0:
        return 1.0 - math.acos(_check_c(c)) / math.pi
    return alpha * alpha / (2.0 * alpha - 1.0) * j_alpha(alpha - 1.0, c).value


# ---------------------------------------------------------------------------
# Bessel representation
# ---------------------------------------------------------------------------

def k0_scaled(z: float) -> float:
    """``exp(z) K_0(z)`` from ``int_0^inf exp(-2 z sinh(t/2)**2) dt``.

    The integral is ``int_1^inf exp(-z x) (x^2 - 1)^(-1/2) dx`` after the
    substitution ``x = cosh t``, which removes the endpoint singularity.
    """
    z = float(z)
    if not z > 0:
        raise DomainError("K_0 needs a positive argument")
    t_max = 2.0 * math.asinh(math.sqrt(400.0 / z))
    val, _ = _quad(lambda t: math.exp(-2.0 * z * math.sinh(0.5 * t) ** 2), 0.0, t_max,
                   epsabs=0.0, epsrel=1e-13)
    return val


def k0(z: float) -> float:
    """Modified Bessel function of the second kind of order zero."""
    return math.exp(-z) * k0_scaled(z)


def bessel_moment(alpha: float, theta: float) -> KernelValue:
    """``L_alpha(theta) = int_0^inf K_0(x) exp(x cos theta) x**alpha dx``."""
    if not alpha > -1.0:
        raise DomainError("moment needs alpha > -1")
    if not 0.0 < theta < math.pi:
        raise DomainError("theta must lie in (0, pi)")
    rate = 2.0 * math.sin(0.5 * theta) ** 2  # 1 - cos(theta), without cancellation

    def f(x):
        return k0_scaled(x) * math.exp(-rate * x) * x ** alpha

    x1 = max(2.0, 40.0 / rate)
    total, err = 0.0, 0.0
    for a, b in ((0.0, 1.0), (1.0, x1), (x1, math.inf)):
        v, e = _quad(f, a, b, epsabs=1e-14, epsrel=1e-12)
        total += v
        err += e
    return KernelValue(total, err)


def j_alpha_via_bessel(alpha: float, theta: float) -> KernelValue:
    """``J_alpha(theta) = sin(theta)**(2 alpha + 1) L_alpha(theta) / (2 pi c_alpha)``."""
    m = bessel_moment(alpha, theta)
    g = math.sin(theta) ** (2.0 * alpha + 1.0) / (2.0 * math.pi * c_alpha(alpha))
    return KernelValue(g * m.value, abs(g) * m.est_abs_error)


# ---------------------------------------------------------------------------
# quadrature for V and W
# ---------------------------------------------------------------------------

def _phi(t):
    return np.exp(-0.5 * t * t) / _SQRT2PI


def _tip_beta(a: Activation, power: float):
    # algebraic exponent of act(x)**power at the kink, if known
    return a.alpha * power if a.kind == "alpha_relu" else None


def _tanh_d(y):
    return np.tanh(y) - special.erf(_KAPPA * y)


def _sech2(x):
    t = np.exp(-2.0 * np.abs(x))
    return 4.0 * t / (1.0 + t) ** 2


def _tanh_v(q, order=10, n_h=64):
    if q <= 0.25:
        x, w = qr.gauss_hermite(n_h)
        return float(np.dot(w, np.tanh(math.sqrt(q) * x) ** 2))
    z, w = qr.normal_rule(q, order)
    return 1.0 - float(np.dot(w, _sech2(z)))


def _tanh_vdot(q, order=10, n_h=64):
    z, w = qr.normal_rule(q, order, n_h)
    return float(np.dot(w, _sech2(z) ** 2))


def _tanh_w(q, c, order=10, n_h=64):
    if q <= 0.25:
        x, w = qr.gauss_hermite(n_h)
        s = math.sqrt((1.0 - c) * (1.0 + c))
        r = math.sqrt(q)
        f = np.tanh(r * x)[:, None] * np.tanh(r * (c * x[:, None] + s * x[None, :]))
        return float(w @ f @ w)
    # tanh = erf(k .) + d with d smooth and exponentially decaying; the
    # erf-erf part has a closed form and the d parts need only 1-D rules
    # in the conditioning variable.
    k2 = _KAPPA * _KAPPA
    tau2 = q * (1.0 - c) * (1.0 + c)
    tau = math.sqrt(tau2)
    t1 = 2.0 / math.pi * math.asin(2.0 * k2 * c * q / (1.0 + 2.0 * k2 * q))
    z, w = qr.normal_rule(q, order, n_h)
    dz = _tanh_d(z)
    t2 = float(np.dot(w, dz * special.erf(_KAPPA * c * z / math.sqrt(1.0 + 2.0 * k2 * tau2))))
    if tau <= 0.5:
        x, wx = qr.gauss_hermite(n_h)
        h = _tanh_d(c * z[:, None] + tau * x[None, :]) @ wx
    else:
        y, wy = qr.panels(-20.0, 20.0, 0.5 if tau < 1.0 else 1.0, order)
        dens = np.exp(-(y[None, :] - c * z[:, None]) ** 2 / (2.0 * tau2)) / (_SQRT2PI * tau)
        h = dens @ (wy * _tanh_d(y))
    t3 = float(np.dot(w, dz * h))
    return t1 + 2.0 * t2 + t3


def _graded_expect(g, a: Activation, q, beta, order=10):
    # E[g(z)] for g supported on z > 0
    n_j = 24 if order >= 10 else 14
    t0, w0 = qr.tip_rule(beta, order, n_j)
    t1, w1 = qr.panels(1.0, qr.T_MAX, 0.5, order)
    t = np.concatenate([t0, t1])
    w = np.concatenate([w0, w1])
    return float(np.dot(w, g(math.sqrt(q) * t) * _phi(t)))


def _graded_w(a: Activation, q, c, order=10):
    s = math.sqrt((1.0 - c) * (1.0 + c))
    r = math.sqrt(q)
    n_j = 24 if order >= 10 else 14
    beta = _tip_beta(a, 1.0)
    # outer variable u > 0; the inner average varies on the scale s near
    # u = 0, so the end panel has width min(s, 1) followed by a geometric mesh
    tip = min(s, 1.0)
    tu0, wu0 = qr.tip_rule(beta, order, n_j)
    n_geo = int(math.ceil(-math.log2(tip))) if tip < 1.0 else 0
    geo = np.concatenate([tip * 2.0 ** np.arange(n_geo), [1.0]]) if n_geo else np.array([1.0])
    tg, wg_ = qr.composite(geo, order) if n_geo else (np.empty(0), np.empty(0))
    tu1, wu1 = qr.panels(1.0, qr.T_MAX, 0.5, order)
    u = np.concatenate([tip * tu0, tg, tu1])
    wu = np.concatenate([tip * wu0, wg_, wu1])
    # inner variable v: act(r (c u + s v)) vanishes for v < v0 = -c u / s;
    # parametrize by the distance d = v - v0 so the kink is at d = 0.
    v0 = -c * u / s
    lo = np.maximum(v0, -qr.T_MAX)
    span = np.maximum(qr.T_MAX - lo, 0.0)
    h = np.minimum(1.0, span)
    kink = v0 >= -qr.T_MAX
    tk, wk = qr.tip_rule(beta, order, n_j)
    if beta is None:
        ts, ws = tk, wk
    else:
        xg, wg = qr.gauss_legendre(len(tk))
        ts, ws = 0.5 * (xg + 1.0), 0.5 * wg
    tip_t = np.where(kink[:, None], tk[None, :], ts[None, :])
    tip_w = np.where(kink[:, None], wk[None, :], ws[None, :])
    d_tip = (lo - v0)[:, None] + h[:, None] * tip_t
    w_tip = h[:, None] * tip_w
    n_rest = 24
    xg, wg = qr.gauss_legendre(order)
    rest_lo = lo + h
    width = np.maximum(qr.T_MAX - rest_lo, 0.0) / n_rest
    k = np.arange(n_rest)
    mid = rest_lo[:, None, None] + width[:, None, None] * (k[None, :, None] + 0.5 + 0.5 * xg[None, None, :])
    d_rest = (mid - v0[:, None, None]).reshape(len(u), -1)
    w_rest = (0.5 * width[:, None, None] * np.broadcast_to(wg, (1, n_rest, order))).reshape(len(u), -1)
    d = np.concatenate([d_tip, d_rest], axis=1)
    wv = np.concatenate([w_tip, w_rest], axis=1)
    inner = np.sum(wv * a.apply(r * s * d) * _phi(v0[:, None] + d), axis=1)
    inner = np.where(span > 0, inner, 0.0)
    return float(np.dot(wu, a.apply(r * u) * _phi(u) * inner))


def _gh_expect(g, q, n):
    x, w = qr.gauss_hermite(n)
    return float(np.dot(w, g(math.sqrt(q) * x)))


def _gh_w(a, q, c, n):
    x, w = qr.gauss_hermite(n)
    s = math.sqrt((1.0 - c) * (1.0 + c))
    r = math.sqrt(q)
    f = a.apply(r * x)[:, None] * a.apply(r * (c * x[:, None] + s * x[None, :]))
    return float(w @ f @ w)


def _simpson_sided(g, x0, length, tol, beta=None):
    # int_{x0}^{x0 + length} g (length may be negative) with x = x0 +- t^k.
    # For g ~ |x - x0|^beta the choice k = 2 / (beta + 1) makes the new
    # integrand vanish at least linearly at t = 0. k never drops below 2.
    if length == 0.0:
        return 0.0, 0.0
    k = 2.0 if beta is None else max(2.0, 2.0 / (beta + 1.0))
    sign = 1.0 if length > 0 else -1.0
    v, e = qr.adaptive_simpson(lambda t: k * t ** (k - 1.0) * g(x0 + sign * t ** k), 0.0,
                               abs(length) ** (1.0 / k), tol)
    return sign * v, e


def _simpson_expect(g, a, q, tol, beta=None):
    r = math.sqrt(q)

    def f(t):
        return float(g(np.array(r * t))) * math.exp(-0.5 * t * t) / _SQRT2PI

    if a.kind == "tanh":
        v, e = qr.adaptive_simpson(f, 0.0, qr.T_MAX, tol)
        v2, e2 = qr.adaptive_simpson(f, -qr.T_MAX, 0.0, tol)
        return v + v2, e + e2
    return _simpson_sided(f, 0.0, qr.T_MAX, tol, beta)


def _simpson_w(a, q, c, tol):
    s = math.sqrt((1.0 - c) * (1.0 + c))
    r = math.sqrt(q)
    act = a.apply
    T = qr.T_MAX
    smooth = a.kind == "tanh"
    # the outer rule differences inner values, so they must be much sharper
    tin = tol * 1e-3

    def inner(u):
        fu = float(act(r * u))
        if fu == 0.0:
            return 0.0
        g = lambda v: fu * float(act(r * (c * u + s * v))) * math.exp(-0.5 * (u * u + v * v)) / (2 * math.pi)
        v0 = -c * u / s
        if not -T < v0 < T:
            return qr.adaptive_simpson(g, -T, T, tin)[0]
        if smooth:
            return qr.adaptive_simpson(g, -T, v0, tin)[0] + qr.adaptive_simpson(g, v0, T, tin)[0]
        return _simpson_sided(g, v0, -T - v0, tin)[0] + _simpson_sided(g, v0, T - v0, tin)[0]

    if smooth:
        v, e = qr.adaptive_simpson(inner, -T, 0.0, tol)
        v2, e2 = qr.adaptive_simpson(inner, 0.0, T, tol)
        return v + v2, e + e2
    return _simpson_sided(inner, 0.0, T, tol)


def _expect(g, a: Activation, q, spec: QuadratureSpec, beta, tanh_fn=None):
    if spec.scheme == "gauss_hermite":
        n = spec.node_count
        v = _gh_expect(g, q, n)
        err = max(abs(v - _gh_expect(g, q, max(8, n // k))) for k in (2, 4))
        return KernelValue(v, err)
    if spec.scheme == "adaptive_simpson":
        v, e = _simpson_expect(g, a, q, spec.tol, beta)
        return KernelValue(v, e)
    if a.kind == "tanh":
        v = tanh_fn(q)
        return KernelValue(v, abs(v - tanh_fn(q, 6, 40)))
    v = _graded_expect(g, a, q, beta)
    return KernelValue(v, abs(v - _graded_expect(g, a, q, beta, order=6)))


def v_transform(a: Activation, q: float, spec: QuadratureSpec = DEFAULT_SPEC) -> KernelValue:
    """``E[phi(z)**2]`` for ``z ~ N(0, q)`` by quadrature.

    Parameters
    ----------
    a : Activation
    q : float
        Variance, ``q >= 0``. ``q == 0`` returns ``phi(0)**2`` exactly.
    spec : QuadratureSpec
    """
    q = _check_q(q)
    if q == 0.0:
        return KernelValue(float(a.apply(0.0)) ** 2, 0.0)
    return _expect(lambda z: a.apply(z) ** 2, a, q, spec, _tip_beta(a, 2.0), _tanh_v)


def v_dot_transform(a: Activation, q: float, spec: QuadratureSpec = DEFAULT_SPEC) -> KernelValue:
    """``E[phi'(z)**2]`` for ``z ~ N(0, q)`` by quadrature (``q > 0``)."""
    q = _check_q(q, strict=True)
    if a.kind == "alpha_relu" and a.alpha <= 0.5:
        raise DomainError("V of the alpha-ReLU derivative diverges for alpha <= 1/2")
    beta = 2.0 * a.alpha - 2.0 if a.kind == "alpha_relu" else None
    return _expect(lambda z: a.deriv(z) ** 2, a, q, spec, beta, _tanh_vdot)


def w_transform(a: Activation, q: float, c: float, spec: QuadratureSpec = DEFAULT_SPEC) -> KernelValue:
    """``E[phi(z) phi(z')]`` for a Gaussian pair with variances ``q`` and correlation ``c``.

    Uses ``z = sqrt(q) u`` and ``z' = sqrt(q) (c u + sqrt(1 - c^2) v)`` with
    independent standard normals ``u, v``.
    """
    q = _check_q(q, strict=True)
    c = _check_c(c)
    if c == 1.0:
        return v_transform(a, q, spec)
    if a.kind != "tanh" and c == -1.0:
        return KernelValue(0.0, 0.0)  # disjoint supports
    if a.kind == "tanh" and c == 0.0:
        return KernelValue(0.0, 0.0)  # odd activation, independent inputs
    if spec.scheme == "gauss_hermite":
        n = spec.node_count // 2
        v = _gh_w(a, q, c, n)
        err = max(abs(v - _gh_w(a, q, c, max(8, n // k))) for k in (2, 4))
        return KernelValue(v, err)
    if spec.scheme == "adaptive_simpson":
        v, e = _simpson_w(a, q, c, spec.tol)
        return KernelValue(v, e)
    if a.kind == "tanh":
        v = _tanh_w(q, c)
        return KernelValue(v, abs(v - _tanh_w(q, c, 6, 40)))
    v = _graded_w(a, q, c)
    return KernelValue(v, abs(v - _graded_w(a, q, c, order=6)))


# ---------------------------------------------------------------------------
# fast scalar evaluators used by the recurrences
# ---------------------------------------------------------------------------

def v_value(a: Activation, q: float) -> float:
    """V without an error estimate; closed form for the alpha-ReLU."""
    if a.kind == "alpha_relu":
        return v_psi_closed(a.alpha, q)
    if q == 0.0:
        return 0.0
    if a.kind == "tanh":
        return _tanh_v(q)
    return _graded_expect(lambda z: a.apply(z) ** 2, a, q, None)


def v_dot_value(a: Activation, q: float) -> float:
    """V of the derivative without an error estimate."""
    if a.kind == "alpha_relu":
        return v_dot_psi_closed(a.alpha, q)
    if a.kind == "tanh":
        return _tanh_vdot(q)
    return _graded_expect(lambda z: a.deriv(z) ** 2, a, q, None)


def kernel_value(a: Activation, c: float) -> float:
    """``JJ_alpha(c)`` for the alpha-ReLU, using the closed form at ``alpha = 1``."""
    if a.alpha == 1.0:
        return j1_closed(c)
    return j_alpha(a.alpha, c).value


def w_value(a: Activation, q: float, c: float) -> float:
    """W without an error estimate; ``V(q) JJ_alpha(c)`` for the alpha-ReLU."""
    if c == 1.0:
        return v_value(a, q)
    if a.kind == "alpha_relu":
        return v_psi_closed(a.alpha, q) * kernel_value(a, c)
    if a.kind == "tanh":
        return 0.0 if c == 0.0 else _tanh_w(q, c)
    return 0.0 if c == -1.0 else _graded_w(a, q, c)
