"""Activation functions and their derivatives.

Three families are supported: ``tanh``, the alpha-ReLU ``x -> x**alpha`` on
the positive half line, and a tempered alpha-ReLU ``(x + eps)**alpha -
eps**alpha`` that has a bounded derivative at the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError

KINDS = ("tanh", "alpha_relu", "tempered_alpha_relu")
DEFAULT_EPS = 1e-4


@dataclass(frozen=True)
class Activation:
    """Immutable description of a nonlinearity.

    Use the factory methods rather than the constructor directly.

    Attributes
    ----------
    kind : str
        One of ``"tanh"``, ``"alpha_relu"``, ``"tempered_alpha_relu"``.
    alpha : float or None
        Exponent for the alpha-ReLU families.
    eps : float or None
        Tempering offset, only for ``"tempered_alpha_relu"``.
    """

    kind: str
    alpha: Optional[float] = None
    eps: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown activation kind {self.kind!r}")
        if self.kind == "tanh":
            if self.alpha is not None or self.eps is not None:
                raise DomainError("tanh takes no parameters")
            return
        if self.alpha is None or not math.isfinite(self.alpha):
            raise DomainError(f"{self.kind} needs a finite alpha")
        if self.alpha <= -0.5:
            raise DomainError(f"alpha must exceed -1/2, got {self.alpha}")
        if self.kind == "tempered_alpha_relu":
            if self.eps is None or not (self.eps > 0 and math.isfinite(self.eps)):
                raise DomainError("tempered alpha-ReLU needs eps > 0")
        elif self.eps is not None:
            raise DomainError("alpha_relu takes no eps")

    # -- factories -----------------------------------------------------
    @classmethod
    def tanh(cls) -> "Activation":
        return cls("tanh")

    @classmethod
    def alpha_relu(cls, alpha: float) -> "Activation":
        return cls("alpha_relu", float(alpha))

    @classmethod
    def tempered_alpha_relu(cls, alpha: float, eps: float = DEFAULT_EPS) -> "Activation":
        return cls("tempered_alpha_relu", float(alpha), float(eps))

    @classmethod
    def from_dict(cls, d: dict) -> "Activation":
        """Build from a config mapping such as ``{"kind": "alpha_relu", "alpha": 0.7}``."""
        d = dict(d)
        kind = d.pop("kind", None)
        alpha = d.pop("alpha", None)
        eps = d.pop("eps", None)
        if d:
            raise DomainError(f"unknown activation keys: {sorted(d)}")
        if kind == "tanh":
            return cls("tanh", alpha, eps)
        if kind == "alpha_relu":
            if alpha is None:
                raise DomainError("alpha_relu needs alpha")
            return cls("alpha_relu", float(alpha), eps)
        if kind == "tempered_alpha_relu":
            if alpha is None:
                raise DomainError("tempered_alpha_relu needs alpha")
            return cls.tempered_alpha_relu(alpha, DEFAULT_EPS if eps is None else eps)
        raise DomainError(f"unknown activation kind {kind!r}")

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.eps is not None:
            d["eps"] = self.eps
        return d

    # -- properties ----------------------------------------------------
    @property
    def is_antisymmetric(self) -> bool:
        return self.kind == "tanh"

    @property
    def is_alpha_relu(self) -> bool:
        return self.kind == "alpha_relu"

    def label(self) -> str:
        if self.kind == "tanh":
            return "tanh"
        if self.kind == "alpha_relu":
            return f"alpha_relu({self.alpha:g})"
        return f"tempered_alpha_relu({self.alpha:g}, {self.eps:g})"

    # -- vectorized evaluation (no domain checks) ------------------------
    def apply(self, x):
        """Evaluate the activation elementwise on an array."""
        x = np.asarray(x, dtype=float)
        if self.kind == "tanh":
            return np.tanh(x)
        pos = x > 0
        xp = np.where(pos, x, 1.0)
        if self.kind == "alpha_relu":
            return np.where(pos, xp ** self.alpha, 0.0)
        return np.where(pos, (xp + self.eps) ** self.alpha - self.eps ** self.alpha, 0.0)

    def deriv(self, x):
        """Evaluate the derivative elementwise; 0 at the alpha-ReLU kink."""
        x = np.asarray(x, dtype=float)
        if self.kind == "tanh":
            return _sech2(x)
        pos = x > 0
        xp = np.where(pos, x, 1.0)
        if self.kind == "alpha_relu":
            return np.where(pos, self.alpha * xp ** (self.alpha - 1.0), 0.0)
        return np.where(pos, self.alpha * (xp + self.eps) ** (self.alpha - 1.0), 0.0)


def _sech2(x):
    # overflow-free sech^2 via exp(-2|x|)
    t = np.exp(-2.0 * np.abs(x))
    return 4.0 * t / (1.0 + t) ** 2


def _check_finite(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"activation input must be finite, got {x}")
    return x


def activate(a: Activation, x: float) -> float:
    """Scalar activation value.

    Examples
    --------
    >>> activate(Activation.alpha_relu(0.5), 4.0)
    2.0
    """
    x = _check_finite(x)
    if a.kind == "tanh":
        return math.tanh(x)
    if x <= 0:
        return 0.0
    if a.kind == "alpha_relu":
        return x ** a.alpha
    return (x + a.eps) ** a.alpha - a.eps ** a.alpha


def activate_deriv(a: Activation, x: float) -> float:
    """Scalar derivative. The alpha-ReLU families use 0 at ``x == 0``."""
    x = _check_finite(x)
    if a.kind == "tanh":
        t = math.exp(-2.0 * abs(x))
        return 4.0 * t / (1.0 + t) ** 2
    if x <= 0:
        return 0.0
    if a.kind == "alpha_relu":
        return a.alpha * x ** (a.alpha - 1.0)
    return a.alpha * (x + a.eps) ** (a.alpha - 1.0)
