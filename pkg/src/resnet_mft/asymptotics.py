"""Closed-form fixed points, asymptotic coefficients and exponent fitting."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import transforms as tf
from .errors import DegenerateCaseWarning, DivergentVarianceWarning, DomainError, NumericalError
from .recurrence import NetConfig

FAMILIES = ("TanhP", "TanhGradLogRatio", "ReluPClosed", "ReluEConvergence",
            "AlphaReluP", "AlphaReluGradExponent", "ChiExponents")
C_SQRT = math.sqrt(2.0 / math.pi)
U_RELU = 2.0 * math.sqrt(2.0) / (3.0 * math.pi)


@dataclass(frozen=True)
class FixedPointResult:
    """Solution of a correlation fixed-point equation.

    Attributes
    ----------
    e_star : float
        Fixed point in ``[0, 1]``.
    exponent : float
        Convergence exponent (``delta*`` for tanh FRN, ``mu`` for alpha-ReLU).
    slope_at_fixed_point : float
        Derivative of the map at ``e_star`` (NaN when not applicable).
    residual : float
        ``|map(e_star) - e_star|``.
    degenerate : bool
        True for the zero-variance branch where the equation does not apply.
    """

    e_star: float
    exponent: float
    slope_at_fixed_point: float
    residual: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"e_star": self.e_star, "exponent": self.exponent,
                "slope_at_fixed_point": self.slope_at_fixed_point,
                "residual": self.residual, "degenerate": self.degenerate}


@dataclass(frozen=True)
class AsymptoticLaw:
    """Named coefficients of one asymptotic law."""

    family: str
    coefficients: Dict[str, float]
    flags: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown law family {self.family!r}")
        for k, v in self.coefficients.items():
            if not math.isfinite(v):
                raise NumericalError(f"coefficient {k} is not finite")

    def __getitem__(self, name):
        return self.coefficients[name]

    def to_dict(self) -> dict:
        return {"family": self.family, "coefficients": dict(self.coefficients),
                **({"flags": dict(self.flags)} if self.flags else {})}


def bisect(f, lo: float, hi: float, max_iter: int = 200):
    """Bisection on a sign change of ``f`` over ``[lo, hi]``.

    Returns the midpoint of the final bracket. Raises ``NumericalError``
    when ``f(lo)`` and ``f(hi)`` share a sign.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NumericalError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# tanh
# ---------------------------------------------------------------------------

def _tanh_fp_gap(frac):
    # RHS(e) - e written in eps = 1 - e, using arccos(1 - eps) = 2 arcsin(sqrt(eps/2));
    # this keeps full relative precision when e* is close to 1.
    return lambda eps: eps - frac * (4.0 / math.pi) * math.asin(math.sqrt(0.5 * eps))


def tanh_frn_fixed_point(var_v: float, var_a: float) -> FixedPointResult:
    """Fixed point of ``e = (s_v^2 (2/pi) arcsin e + s_a^2) / (s_v^2 + s_a^2)``.

    Only the ratio ``var_a / var_v`` matters. The stable root is bracketed
    in ``eps = 1 - e`` between the trivial root ``eps = 0`` and ``eps = 1``.
    ``var_v == 0`` is the degenerate branch where the correlation tends to
    1 like ``1/l``.

    Examples
    --------
    >>> r = tanh_frn_fixed_point(1.0, 0.0)
    >>> r.e_star, round(r.exponent, 5)
    (0.0, 0.36338)
    """
    if not (var_v >= 0 and var_a >= 0):
        raise DomainError("variances must be >= 0")
    if var_v == 0:
        warnings.warn("var_v = 0: correlation tends to 1", DegenerateCaseWarning, stacklevel=2)
        return FixedPointResult(1.0, 1.0, math.nan, 0.0, degenerate=True)
    if var_a == 0:
        return FixedPointResult(0.0, 1.0 - 2.0 / math.pi, 2.0 / math.pi, 0.0)
    frac = 1.0 / (1.0 + var_a / var_v)  # s_v^2 / (s_v^2 + s_a^2), via the ratio only
    gap = _tanh_fp_gap(frac)
    # for var_a / var_v below rounding level the root sits at e* = 0
    eps = bisect(gap, 1e-300, 1.0) if gap(1.0) > 0 else 1.0
    slope = frac * (2.0 / math.pi) / math.sqrt(eps * (2.0 - eps))
    return FixedPointResult(1.0 - eps, 1.0 - slope, slope, abs(gap(eps)))


def _require_tanh(cfg: NetConfig):
    if cfg.activation.kind != "tanh":
        raise DomainError("law applies to tanh only")


def tanh_p_coefficients(cfg: NetConfig) -> AsymptoticLaw:
    """Coefficients of ``p[l] = b0 l + b1 sqrt(l) + b2 log(l) + O(1)``."""
    _require_tanh(cfg)
    if not cfg.var_w > 0:
        raise DomainError("expansion needs var_w > 0")
    sw = math.sqrt(cfg.var_w)
    sv2, sa2 = cfg.sv2, cfg.sa2
    b0 = sv2 + sa2
    b1 = -2.0 * C_SQRT * sv2 / sw / math.sqrt(b0)
    b2 = -C_SQRT ** 2 * sv2 ** 2 / cfg.var_w / b0 ** 2
    return AsymptoticLaw("TanhP", {"b0": b0, "b1": b1, "b2": b2})


def tanh_grad_constants(cfg: NetConfig) -> AsymptoticLaw:
    """Constants ``A`` (sqrt term) and ``B`` (log term) of the gradient law."""
    _require_tanh(cfg)
    sw = math.sqrt(cfg.var_w)
    sv2, sa2 = cfg.sv2, cfg.sa2
    b0 = sv2 + sa2
    A = 4.0 / 3.0 * C_SQRT * sv2 * sw / math.sqrt(b0)
    B = 4.0 / (9.0 * math.pi) * sv2 ** 2 / b0 * (3.0 / b0 - cfg.var_w)
    return AsymptoticLaw("TanhGradLogRatio", {"A": A, "B": B})


def tanh_grad_log_ratio(cfg: NetConfig, l: float, m: float) -> float:
    """Predicted ``log(daleth[m] / daleth[l]) = A (sqrt l - sqrt m) + B (log l - log m)``."""
    _require_tanh(cfg)
    if not 1 <= m <= l:
        raise DomainError("need 1 <= m <= l")
    if cfg.var_w == 0:
        return 0.0
    law = tanh_grad_constants(cfg)
    return law["A"] * (math.sqrt(l) - math.sqrt(m)) + law["B"] * (math.log(l) - math.log(m))


# ---------------------------------------------------------------------------
# alpha-ReLU
# ---------------------------------------------------------------------------

def _require_relu(cfg: NetConfig, alpha=None):
    a = cfg.activation
    if a.kind != "alpha_relu" or cfg.arch != "FRN":
        raise DomainError("law applies to alpha-ReLU FRN only")
    if alpha is not None and a.alpha != alpha:
        raise DomainError(f"law needs alpha = {alpha}")


def relu_p_law(cfg: NetConfig, p0: float = 1.0) -> AsymptoticLaw:
    """Constants of ``p[l] = A + C B**l`` for the ReLU FRN."""
    _require_relu(cfg, 1.0)
    prod = cfg.var_v * cfg.var_w
    if prod == 0:
        slope = 0.5 * cfg.var_v * cfg.var_b + cfg.var_a
        return AsymptoticLaw("ReluPClosed", {"slope": slope, "p0": p0}, {"degenerate_linear": True})
    A = -(2.0 * cfg.var_a + cfg.var_b * cfg.var_v) / prod
    B = 1.0 + 0.5 * prod
    return AsymptoticLaw("ReluPClosed", {"A": A, "B": B, "C": p0 - A})


def relu_p_closed(cfg: NetConfig, p0: float, l: int) -> float:
    """Closed-form ``p[l]`` for the ReLU FRN.

    When ``var_v var_w == 0`` the dynamics are linear in ``l``; that branch
    is returned with a :class:`DegenerateCaseWarning`.
    """
    law = relu_p_law(cfg, p0)
    if law.flags.get("degenerate_linear"):
        warnings.warn("var_v * var_w = 0: linear branch", DegenerateCaseWarning, stacklevel=2)
        return p0 + l * law["slope"]
    return law["A"] + law["C"] * law["B"] ** l


def alpha_relu_p_coefficients(cfg: NetConfig) -> AsymptoticLaw:
    """``K1``, ``K2`` and ``C = var_a`` of ``p ~ K1 l^(1/(1-a)) - K2 l^(a/(1-a)) log l``.

    The ``regime`` flag records the order of the remainder, which changes
    at ``alpha = 1/2``.
    """
    a = cfg.activation
    if a.kind != "alpha_relu" or cfg.arch != "FRN":
        raise DomainError("law applies to alpha-ReLU FRN only")
    al = a.alpha
    if al >= 1:
        raise DomainError("alpha >= 1: use relu_p_closed")
    if not al > 0:
        raise DomainError("law needs alpha in (0, 1)")
    ca = tf.c_alpha(al)
    base = cfg.var_v * cfg.var_w ** al * ca
    K1 = (base * (1.0 - al)) ** (1.0 / (1.0 - al))
    K2 = 0.5 * base ** (1.0 / (1.0 - al)) * (1.0 - al) ** (al / (1.0 - al) - 1.0) * al
    if al > 0.5:
        regime = "alpha>1/2"
    elif al == 0.5:
        regime = "alpha=1/2"
    else:
        regime = "alpha<1/2"
    coef = {"K1": K1, "K2": K2, "C": cfg.var_a, "exponent": 1.0 / (1.0 - al)}
    if al < 0.5:
        coef["linear_remainder"] = cfg.var_a * (1.0 - al) / (1.0 - 2.0 * al)
    return AsymptoticLaw("AlphaReluP", coef, {"regime": regime})


def alpha_relu_e_fixed_point(alpha: float) -> FixedPointResult:
    """Stable fixed point of ``c -> JJ_alpha(c)`` and the rate ``mu``.

    ``mu = (1 - JJ_alpha'(e*)) / (1 - alpha)``.
    """
    if alpha == 1.0:
        raise DomainError("alpha = 1: use relu_e_convergence")
    if not 0.5 < alpha < 1.0:
        raise DomainError("fixed point theory needs alpha in (1/2, 1)")
    f = lambda c: tf.j_alpha(alpha, c).value - c
    e = bisect(f, 0.0, 1.0 - 1e-9)
    slope = tf.j_alpha_deriv(alpha, e)
    return FixedPointResult(e, (1.0 - slope) / (1.0 - alpha), slope, abs(f(e)))


def relu_e_convergence(var_v: float, var_w: float) -> AsymptoticLaw:
    """Coefficient of ``1 - e[l] ~ coeff * l**-2`` for the ReLU FRN."""
    prod = var_v * var_w
    if not prod > 0:
        raise DomainError("law needs var_v * var_w > 0")
    B = 1.0 + 0.5 * prod
    coeff = (0.25 * prod / B * U_RELU) ** -2
    return AsymptoticLaw("ReluEConvergence", {"coefficient": coeff, "U": U_RELU, "B": B,
                                              "exponent": -2.0})


def grad_exponent_R(alpha: float) -> float:
    """``R = alpha^2 / ((1 - alpha)(2 alpha - 1))``."""
    return alpha * alpha / ((1.0 - alpha) * (2.0 * alpha - 1.0))


def alpha_relu_grad_exponent(alpha: float, var_v: Optional[float] = None,
                             var_w: Optional[float] = None) -> AsymptoticLaw:
    """Polynomial exponent ``R`` of ``daleth[0] / daleth[l]``, or the
    exponential base ``B = 1 + var_v var_w / 2`` at ``alpha = 1``."""
    if not 0.5 < alpha <= 1.0:
        raise DomainError("gradient law needs alpha in (1/2, 1]")
    flags = {}
    if alpha <= 0.75:
        flags["diverging_variance"] = True
        warnings.warn(f"alpha = {alpha} <= 3/4: gradient variance diverges",
                      DivergentVarianceWarning, stacklevel=2)
    if alpha == 1.0:
        flags["exponential"] = True
        coef = {}
        if var_v is not None and var_w is not None:
            coef["B"] = 1.0 + 0.5 * var_v * var_w
        return AsymptoticLaw("AlphaReluGradExponent", coef, flags)
    return AsymptoticLaw("AlphaReluGradExponent", {"R": grad_exponent_R(alpha)}, flags)


def chi_exponents(alpha: float) -> AsymptoticLaw:
    """Exponents of the parameter gradients at layer ``l - m`` relative to the top ``l``.

    For ``alpha < 1`` the descriptors are the powers of ``(l - m)``
    multiplying ``l**R``; ``chi_a`` follows ``(l / (l - m))**R``. For
    ``alpha = 1`` the ``chi_w``/``chi_v`` exponents in ``m`` are 0 and
    ``chi_b``/``chi_a`` grow like ``B**m``.
    """
    if not 0.5 < alpha <= 1.0:
        raise DomainError("needs alpha in (1/2, 1]")
    if alpha == 1.0:
        return AsymptoticLaw("ChiExponents", {"chi_w_m": 0.0, "chi_v_m": 0.0},
                             {"chi_b": "B**m", "chi_a": "B**m", "exponential": True})
    R = grad_exponent_R(alpha)
    wv = alpha / (1.0 - alpha) - R
    return AsymptoticLaw("ChiExponents", {"R": R, "chi_b": -R - 1.0, "chi_w": wv, "chi_v": wv,
                                          "chi_a": -R},
                         {"prefactor": "l**R", "chi_a": "(l/(l-m))**R"})


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def fit_exponent(series, l_min: int, l_max: int) -> float:
    """Least-squares slope of ``log(series[l])`` against ``log(l)`` on ``[l_min, l_max]``.

    ``series`` is indexed by layer, so ``series[l]`` belongs to layer ``l``.

    Examples
    --------
    >>> round(fit_exponent([l ** 2 for l in range(100)], 1, 50), 9)
    2.0
    """
    y = np.asarray(series, dtype=float)
    if not (1 <= l_min and l_max >= l_min + 10 and l_max < len(y)):
        raise DomainError("window must satisfy 1 <= l_min, l_max >= l_min + 10, l_max < len")
    l = np.arange(l_min, l_max + 1)
    v = y[l_min:l_max + 1]
    if not np.all(v > 0):
        raise DomainError("series must be strictly positive on the window")
    return float(np.polyfit(np.log(l), np.log(v), 1)[0])
