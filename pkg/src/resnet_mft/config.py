"""Experiment configuration documents (one JSON object per experiment)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

from .errors import ConfigError, DomainError
from .recurrence import NetConfig
from .simulator import SimSpec
from .transforms import QuadratureSpec

DEFAULT_E0_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))
SWEEP_AXES = ("var_w", "var_v", "var_a", "alpha", "depth")
MAX_GRID_POINTS = 10 ** 6
VERIFY_PROFILES = ("default", "quick", "kernel-identities", "transforms", "recurrence",
                   "asymptotics", "monte-carlo")


def _check_keys(d, known, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = set(d) - set(known)
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where} must be a number, got {x!r}")
    return float(x)


def _flag(x, where):
    if not isinstance(x, bool):
        raise ConfigError(f"{where} must be true or false")
    return x


@dataclass(frozen=True)
class PredictOptions:
    backward: bool = True
    daleth_L: float = 1.0
    quadrature: Optional[QuadratureSpec] = None

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, ("backward", "daleth_L", "quadrature"), "predict")
        q = d.get("quadrature")
        if q is not None:
            _check_keys(q, ("node_count", "scheme", "tol"), "predict.quadrature")
            q = QuadratureSpec(**q)
        dl = _number(d.get("daleth_L", 1.0), "predict.daleth_L")
        if not dl > 0:
            raise ConfigError("predict.daleth_L must be positive")
        return cls(_flag(d.get("backward", True), "predict.backward"), dl, q)


@dataclass(frozen=True)
class SimulateOptions:
    forward: bool = True
    backward: bool = True

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, ("forward", "backward"), "simulate")
        return cls(_flag(d.get("forward", True), "simulate.forward"),
                   _flag(d.get("backward", True), "simulate.backward"))


@dataclass(frozen=True)
class VerifyOptions:
    profile: str = "default"
    c_alpha_scale: float = 1.0

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, ("profile", "c_alpha_scale"), "verify")
        profile = d.get("profile", "default")
        if profile not in VERIFY_PROFILES:
            raise ConfigError(f"verify.profile must be one of {VERIFY_PROFILES}")
        scale = _number(d.get("c_alpha_scale", 1.0), "verify.c_alpha_scale")
        return cls(profile, scale)


@dataclass(frozen=True)
class SweepOptions:
    """Two-axis grid; each axis is one of :data:`SWEEP_AXES`."""

    axes: Tuple[Tuple[str, Tuple[float, ...]], ...]
    p0: float = 1.0
    e0: float = 0.5
    levels: Dict[str, Tuple[float, ...]] = field(default_factory=dict)

    @property
    def size(self) -> int:
        n = 1
        for _, vals in self.axes:
            n *= len(vals)
        return n

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, ("axes", "p0", "e0", "levels"), "sweep")
        axes = d.get("axes")
        if not isinstance(axes, dict) or len(axes) != 2:
            raise ConfigError("sweep.axes must map exactly two axis names to value lists")
        out = []
        for name, vals in axes.items():
            if name not in SWEEP_AXES:
                raise ConfigError(f"sweep axis {name!r} not in {SWEEP_AXES}")
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"sweep.axes.{name} must be a non-empty list")
            vals = tuple(_number(v, f"sweep.axes.{name}") for v in vals)
            if name == "depth" and any(v != int(v) or v < 1 for v in vals):
                raise ConfigError("depth values must be integers >= 1")
            out.append((name, vals))
        levels = d.get("levels", {})
        if not isinstance(levels, dict):
            raise ConfigError("sweep.levels must be an object")
        lv = {k: tuple(_number(x, f"sweep.levels.{k}") for x in v) for k, v in levels.items()}
        opts = cls(tuple(out), _number(d.get("p0", 1.0), "sweep.p0"),
                   _number(d.get("e0", 0.5), "sweep.e0"), lv)
        return opts


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one CLI invocation needs, parsed from a single JSON document.

    Only ``verify`` may run without a ``net`` section.
    """

    net: Optional[NetConfig] = None
    sim: Optional[SimSpec] = None
    initial_conditions: Tuple[Tuple[float, float], ...] = tuple((1.0, e) for e in DEFAULT_E0_GRID)
    outputs: str = "out"
    name: str = ""
    figure: str = ""
    description: str = ""
    predict: PredictOptions = PredictOptions()
    simulate: SimulateOptions = SimulateOptions()
    verify: VerifyOptions = VerifyOptions()
    sweep: Optional[SweepOptions] = None

    KEYS = ("name", "figure", "description", "net", "sim", "initial_conditions", "outputs",
            "predict", "simulate", "verify", "sweep")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        _check_keys(d, cls.KEYS, "config")
        try:
            net = NetConfig.from_dict(d["net"]) if d.get("net") is not None else None
            sim = SimSpec.from_dict(d["sim"]) if d.get("sim") is not None else None
            ics = d.get("initial_conditions")
            if ics is None:
                ics = cls.initial_conditions
            else:
                if not isinstance(ics, list) or not ics:
                    raise ConfigError("initial_conditions must be a non-empty list of [p0, e0]")
                parsed = []
                for ic in ics:
                    if not isinstance(ic, list) or len(ic) != 2:
                        raise ConfigError("each initial condition is a [p0, e0] pair")
                    p0, e0 = _number(ic[0], "p0"), _number(ic[1], "e0")
                    if not p0 > 0 or not abs(e0) <= 1:
                        raise ConfigError(f"initial condition out of range: {ic}")
                    parsed.append((p0, e0))
                ics = tuple(parsed)
            for key in ("name", "figure", "description", "outputs"):
                if key in d and not isinstance(d[key], str):
                    raise ConfigError(f"{key} must be a string")
            return cls(
                net=net, sim=sim, initial_conditions=ics,
                outputs=d.get("outputs", "out"), name=d.get("name", ""),
                figure=d.get("figure", ""), description=d.get("description", ""),
                predict=PredictOptions.from_dict(d.get("predict", {})),
                simulate=SimulateOptions.from_dict(d.get("simulate", {})),
                verify=VerifyOptions.from_dict(d.get("verify", {})),
                sweep=SweepOptions.from_dict(d["sweep"]) if d.get("sweep") is not None else None,
            )
        except (DomainError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return cls.from_json(text)

    def require_net(self) -> NetConfig:
        if self.net is None:
            raise ConfigError("this command needs a 'net' section")
        return self.net
