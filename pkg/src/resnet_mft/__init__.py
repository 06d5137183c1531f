"""Mean-field theory of random residual networks.

Layerwise recurrences for forward and backward statistics, the integral
transforms they need, closed-form asymptotics, and a Monte Carlo simulator
for finite-width networks.
"""
from .errors import (ConfigError, DegenerateCaseWarning, DivergentVarianceWarning, DomainError,
                     NumericalError)
from .nonlin import Activation
from .recurrence import BackwardTrajectory, ForwardTrajectory, NetConfig, backward, forward
from .simulator import LayerStats, SimSpec, compare, make_input_pair, simulate_backward, simulate_forward
from .transforms import KernelValue, QuadratureSpec, v_dot_transform, v_transform, w_transform

__version__ = "0.1.0"

__all__ = [
    "Activation", "NetConfig", "ForwardTrajectory", "BackwardTrajectory", "forward", "backward",
    "SimSpec", "LayerStats", "make_input_pair", "simulate_forward", "simulate_backward", "compare",
    "QuadratureSpec", "KernelValue", "v_transform", "v_dot_transform", "w_transform",
    "DomainError", "NumericalError", "ConfigError", "DivergentVarianceWarning",
    "DegenerateCaseWarning",
]
