"""Command-line front end: ``resnet-mft {predict,simulate,verify,sweep}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from . import artifacts
from . import asymptotics as asy
from . import verify as verify_mod
from .config import VERIFY_PROFILES, ExperimentConfig
from .errors import ConfigError, DomainError, NumericalError
from .recurrence import NetConfig, backward, forward
from .simulator import compare, simulate_backward, simulate_forward
from .sweep import run_sweep

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _flags_from(caught):
    return sorted({type(w.message).__name__ for w in caught})


def asymptotic_summary(net: NetConfig, p0: float = 1.0) -> dict:
    """Fixed points, coefficients and exponents that apply to ``net``."""
    a = net.activation
    out = {"fixed_point": None, "laws": {}}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if a.kind == "tanh":
            if net.arch == "FRN":
                fp = asy.tanh_frn_fixed_point(net.var_v, net.var_a)
            else:
                fp = asy.FixedPointResult(0.0, 1.0 - 2.0 / math.pi, 2.0 / math.pi, 0.0)
            out["fixed_point"] = {**fp.to_dict(), "delta_star": fp.exponent}
            if net.var_w > 0:
                out["laws"]["p"] = asy.tanh_p_coefficients(net).to_dict()
            out["laws"]["grad"] = asy.tanh_grad_constants(net).to_dict()
        elif a.kind == "alpha_relu" and net.arch == "FRN":
            al = a.alpha
            if al == 1.0:
                out["fixed_point"] = {"e_star": 1.0}
                out["laws"]["p"] = asy.relu_p_law(net, p0).to_dict()
                if net.var_v * net.var_w > 0:
                    out["laws"]["e"] = asy.relu_e_convergence(net.var_v, net.var_w).to_dict()
            elif 0 < al < 1:
                out["laws"]["p"] = asy.alpha_relu_p_coefficients(net).to_dict()
            if 0.5 < al < 1:
                fp = asy.alpha_relu_e_fixed_point(al)
                out["fixed_point"] = {**fp.to_dict(), "mu": fp.exponent}
            if 0.5 < al <= 1:
                out["laws"]["grad"] = asy.alpha_relu_grad_exponent(al, net.var_v, net.var_w).to_dict()
                out["laws"]["chi"] = asy.chi_exponents(al).to_dict()
    out["warnings"] = _flags_from(caught)
    return out


def cmd_predict(cfg: ExperimentConfig, out: Path) -> int:
    net = cfg.require_net()
    spec = cfg.predict.quadrature
    traj = []
    back_cache = {}
    for k, (p0, e0) in enumerate(cfg.initial_conditions):
        fwd = forward(net, p0, e0, spec)
        artifacts.write_forward(out / f"forward_{k}.csv", fwd)
        entry = {"index": k, "p0": p0, "e0": e0, "forward_csv": f"forward_{k}.csv",
                 "forward_depth": fwd.depth, "forward_overflow": fwd.overflow}
        if cfg.predict.backward:
            if p0 not in back_cache:
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    try:
                        f1 = fwd if e0 == 1.0 else forward(net, p0, 1.0, spec)
                        bwd = backward(net, f1, cfg.predict.daleth_L, spec)
                        name = f"backward_{k}.csv"
                        artifacts.write_backward(out / name, bwd)
                        back_cache[p0] = {"backward_csv": name, "backward_depth": bwd.depth,
                                          "backward_overflow": bwd.overflow,
                                          "diverging_variance": bwd.diverging_variance}
                    except DomainError as exc:
                        back_cache[p0] = {"backward_csv": None, "backward_error": str(exc)}
                back_cache[p0]["backward_warnings"] = _flags_from(caught)
            entry.update(back_cache[p0])
        traj.append(entry)
    summary = asymptotic_summary(net, cfg.initial_conditions[0][0])
    artifacts.write_json(out / "asymptotics.json", {
        "name": cfg.name, "figure": cfg.figure, "net": net.to_dict(),
        "trajectories": traj, "overflow": any(t["forward_overflow"] for t in traj), **summary})
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    net = cfg.require_net()
    if cfg.sim is None:
        raise ConfigError("simulate needs a 'sim' section")
    report = {"name": cfg.name, "figure": cfg.figure, "net": net.to_dict(),
              "sim": cfg.sim.to_dict(), "forward": [], "backward": []}
    if cfg.simulate.forward:
        for k, (p0, e0) in enumerate(cfg.initial_conditions):
            stats = simulate_forward(net, cfg.sim, p0, e0)
            artifacts.write_stats(out / f"sim_forward_{k}.csv", stats)
            theory = forward(net, p0, e0)
            entry = {"index": k, "p0": p0, "e0": e0, "stats_csv": f"sim_forward_{k}.csv",
                     "overflow": stats.overflow or theory.overflow}
            if theory.depth == stats.depth:
                entry["compare"] = compare(theory, stats).to_dict()
            report["forward"].append(entry)
    if cfg.simulate.backward:
        seen = set()
        for k, (p0, _) in enumerate(cfg.initial_conditions):
            if p0 in seen:
                continue
            seen.add(p0)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                stats = simulate_backward(net, cfg.sim, p0)
                try:
                    theory = backward(net, forward(net, p0, 1.0))
                except DomainError:
                    theory = None
            artifacts.write_stats(out / f"sim_backward_{k}.csv", stats)
            entry = {"index": k, "p0": p0, "stats_csv": f"sim_backward_{k}.csv",
                     "overflow": stats.overflow, "diverging_variance": stats.diverging_variance,
                     "warnings": _flags_from(caught)}
            if theory is not None and theory.depth == stats.depth:
                entry["compare"] = compare(theory, stats).to_dict()
            report["backward"].append(entry)
    artifacts.write_json(out / "compare.json", report)
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig, out: Optional[Path], profile: Optional[str] = None) -> int:
    profile = profile or cfg.verify.profile
    report = verify_mod.run(profile, cfg.verify.c_alpha_scale)
    if out is not None:
        # timings stay on stdout so the JSON report is reproducible
        stable = {**report, "checks": [{k: v for k, v in c.items() if k != "seconds"}
                                       for c in report["checks"]]}
        artifacts.write_json(out / "verify.json", stable)
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}  ({c['seconds']:.2f}s)")
    n_fail = sum(not c["passed"] for c in report["checks"])
    print(f"{len(report['checks']) - n_fail}/{len(report['checks'])} checks passed")
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_sweep(cfg: ExperimentConfig, out: Path) -> int:
    net = cfg.require_net()
    if cfg.sweep is None:
        raise ConfigError("sweep needs a 'sweep' section")
    res = run_sweep(net, cfg.sweep)
    artifacts.write_csv(out / "sweep.csv", res.header, res.rows())
    artifacts.write_json(out / "contours.json", {
        "name": cfg.name, "figure": cfg.figure, "net": net.to_dict(),
        "axes": dict(zip(res.axis_names, res.axis_values)),
        "p0": cfg.sweep.p0, "e0": cfg.sweep.e0, "contours": res.contours})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="resnet-mft",
                                 description="Mean-field predictions and simulations for random residual networks.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("predict", "iterate the recurrences and write trajectories"),
                           ("simulate", "run Monte Carlo networks and compare with theory"),
                           ("verify", "run numerical self-checks"),
                           ("sweep", "evaluate a two-axis hyperparameter grid")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=name != "verify", help="experiment JSON file")
        p.add_argument("--out", help="output directory (overrides the config)")
        if name == "verify":
            p.add_argument("--profile", choices=VERIFY_PROFILES, help="subset of checks to run")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        out = Path(args.out or cfg.outputs)
        if args.command == "verify":
            return cmd_verify(cfg, out if (args.out or args.config) else None, args.profile)
        cmd = {"predict": cmd_predict, "simulate": cmd_simulate, "sweep": cmd_sweep}[args.command]
        return cmd(cfg, out)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
