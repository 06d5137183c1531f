"""Acceptance criteria, one test per criterion.

Every test prints a single ``criterion N: PASS|FAIL ...`` line with the
measured quantities and wall time. The lines are also collected and repeated
in the pytest terminal summary (see ``conftest.py``). Run the file directly
with ``python3 tests/test_acceptance.py`` to get only the report.
"""
import math
import time
import warnings

import numpy as np
import pytest

from resnet_mft import asymptotics as asy
from resnet_mft import transforms as tf
from resnet_mft.nonlin import Activation
from resnet_mft.recurrence import NetConfig, backward, forward
from resnet_mft.simulator import SimSpec, compare, simulate_backward, simulate_forward

TANH = Activation.tanh()
RELU = Activation.alpha_relu(1.0)
FIG1 = dict(var_w=1.69, var_b=0.49, var_v=1.5, var_a=0.5)
E0_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))

LINES = []


def frn(act, depth, **kw):
    return NetConfig("FRN", act, **{**FIG1, **kw}, depth=depth)


def rel(a, b):
    return abs(a - b) / abs(b)


def report(n, ok, elapsed, msg):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s) {msg}"
    LINES.append(line)
    print(line)
    return ok


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_1():
    def run():
        worst = 0.0
        for a in (0.51, 0.6, 0.75, 0.9, 1.0):
            for q in (0.1, 1.0, 10.0):
                v = tf.v_transform(Activation.alpha_relu(a), q).value
                worst = max(worst, rel(v, tf.v_psi_closed(a, q)))
        return worst
    worst, dt = timed(run)
    ok = worst <= 1e-8 and dt < 1.0
    return report(1, ok, dt, f"max rel error {worst:.2e} (tol 1e-8), runtime limit 1 s")


def criterion_2():
    def run():
        worst = 0.0
        for a in (0.6, 0.75, 0.9, 1.0):
            for c in (-0.5, 0.2, 0.6, 0.95):
                q = 1.7
                w = tf.w_transform(Activation.alpha_relu(a), q, c).value
                worst = max(worst, rel(w, tf.v_psi_closed(a, q) * tf.j_alpha(a, c).value))
        return worst
    worst, dt = timed(run)
    ok = worst <= 1e-5 and dt < 10.0
    return report(2, ok, dt, f"max rel error {worst:.2e} on 4x4 grid (tol 1e-5), runtime limit 10 s")


def _j_rec_tail(a, c):
    # at a = 3/2 the pole of 1/(2a - 3) cancels against 1/c_{a-2}
    if 2 * a - 3 == 0:
        return (a - 1) ** 2 * (1 - c * c) * tf.j_alpha_unnormalized(a - 2, c).value / (
            2 * math.pi * tf.c_alpha(a))
    return (a - 1) ** 2 / ((2 * a - 1) * (2 * a - 3)) * (1 - c * c) * tf.j_alpha(a - 2, c).value


def criterion_3():
    def run():
        pts = ((0.7, math.pi / 3), (1.0, 0.5), (0.6, 1.2), (1.5, 2.0), (2.5, math.pi / 4), (0.9, 2.8))
        bessel = max(abs(tf.j_alpha(a, math.cos(th)).value - tf.j_alpha_via_bessel(a, th).value)
                     for a, th in pts)
        recur = max(abs(tf.j_alpha(a, c).value - c * tf.j_alpha(a - 1, c).value - _j_rec_tail(a, c))
                    for a in (1.5, 2.5) for c in (0.2, 0.7))
        h = 1e-5
        deriv = max(abs((tf.j_alpha(a, c + h).value - tf.j_alpha(a, c - h).value) / (2 * h)
                        - tf.j_alpha_deriv(a, c))
                    for a, c in ((0.8, 0.4), (0.6, 0.1), (1.0, 0.5), (1.5, 0.3), (0.9, -0.5)))
        return bessel, recur, deriv
    (bessel, recur, deriv), dt = timed(run)
    ok = max(bessel, recur, deriv) <= 1e-5 and dt < 30.0
    return report(3, ok, dt, f"bessel {bessel:.2e}, recurrence {recur:.2e}, derivative {deriv:.2e} "
                             "(tol 1e-5), runtime limit 30 s")


def criterion_4():
    def run():
        rng = np.random.default_rng(20240601)
        worst_p, worst_ratio = 0.0, 0.0
        for _ in range(10):
            vv, va, vw, vb = rng.uniform(0.1, 2.0, 4)
            p0 = rng.uniform(0.2, 3.0)
            cfg = NetConfig("FRN", RELU, vw, vb, vv, va, depth=40)
            f = forward(cfg, p0, 0.5)
            closed = np.array([asy.relu_p_closed(cfg, p0, l) for l in range(41)])
            worst_p = max(worst_p, float(np.max(np.abs(f.p / closed - 1))))
            b = backward(cfg, f)
            ratio = b.daleth[:-1] / b.daleth[1:]
            worst_ratio = max(worst_ratio, float(np.max(np.abs(ratio / (1 + 0.5 * vv * vw) - 1))))
        return worst_p, worst_ratio
    (wp, wr), dt = timed(run)
    ok = wp <= 1e-12 and wr <= 1e-12
    return report(4, ok, dt, f"p vs A + C B^l max rel {wp:.2e}, daleth ratio max rel {wr:.2e} (tol 1e-12)")


def criterion_5():
    def run():
        L = 10 ** 4
        return {vw: forward(NetConfig("RRN", TANH, vw, 0.5, depth=L), 1.0, 1.0).p[L] / L
                for vw in (0.5, 1.0, 2.0)}
    ratios, dt = timed(run)
    ok = all(0.99 <= r <= 1.01 for r in ratios.values()) and dt < 10.0
    shown = ", ".join(f"var_w={k}: {v:.4f}" for k, v in ratios.items())
    return report(5, ok, dt, f"p/l at l=1e4: {shown} (band [0.99, 1.01]), runtime limit 10 s")


def criterion_6():
    def run():
        fp = asy.tanh_frn_fixed_point(FIG1["var_v"], FIG1["var_a"])
        target = -fp.exponent - 1
        cfg = frn(TANH, 2000)
        slopes = []
        for e0 in E0_GRID:
            d = np.abs(np.diff(forward(cfg, 1.0, e0).e, prepend=np.nan))
            slopes.append(asy.fit_exponent(d, 400, 2000))
        deltas = [asy.tanh_frn_fixed_point(1.0, rho * rho).exponent
                  for rho in np.linspace(0.0, 100.0, 41)]
        return fp, target, slopes, deltas
    (fp, target, slopes, deltas), dt = timed(run)
    res_ok = fp.residual < 1e-12
    slope_ok = all(abs(s - target) <= 0.05 for s in slopes)
    band_ok = all(1 - 2 / math.pi <= d < 0.5 for d in deltas)
    ok = res_ok and slope_ok and band_ok
    return report(6, ok, dt, f"residual {fp.residual:.1e} ({'ok' if res_ok else 'bad'}); "
                             f"slopes {min(slopes):.3f}..{max(slopes):.3f} vs {target:.4f} +- 0.05 "
                             f"({'ok' if slope_ok else 'bad'}); delta* in [1-2/pi, 1/2) on rho grid "
                             f"({'ok' if band_ok else 'bad'})")


SMALL_VARIANCE = ((0.25, 0.25, 0.25, 0.25), (0.5, 0.5, 0.5, 0.5), (0.1, 0.1, 0.1, 0.1))


def criterion_7():
    def run():
        devs = []
        for vv, va, vw, vb in SMALL_VARIANCE:
            cfg = NetConfig("FRN", TANH, vw, vb, vv, va, depth=4000)
            b = backward(cfg, forward(cfg, 1.0, 1.0))
            for m in (1000, 2000):
                devs.append(math.log(b.daleth[m] / b.daleth[4000])
                            - asy.tanh_grad_log_ratio(cfg, 4000, m))
        return devs
    devs, dt = timed(run)
    worst = max(abs(d) for d in devs)
    ok = worst < 2 and dt < 30.0
    return report(7, ok, dt, f"max |deviation| {worst:.3f} over {len(devs)} (config, m) pairs "
                             "(band 2), runtime limit 30 s")


def criterion_8():
    def run():
        slopes, ratio = {}, None
        for a in (0.55, 0.7):
            cfg = frn(Activation.alpha_relu(a), 2000)
            p = forward(cfg, 1.0, 1.0).p
            slopes[a] = asy.fit_exponent(p, 500, 2000)
            if a == 0.55:
                ratio = p[2000] / 2000 ** (1 / (1 - a)) / asy.alpha_relu_p_coefficients(cfg)["K1"]
        return slopes, ratio
    (slopes, ratio), dt = timed(run)
    ok = all(abs(s - 1 / (1 - a)) <= 0.05 for a, s in slopes.items()) and abs(ratio - 1) <= 0.1
    shown = ", ".join(f"alpha={a}: {s:.4f} vs {1 / (1 - a):.4f}" for a, s in slopes.items())
    return report(8, ok, dt, f"slopes {shown} (tol 0.05); p/(K1 l^(1/(1-a))) at 2000 = {ratio:.4f} "
                             "(tol 10%)")


def criterion_9():
    def run():
        fits = {}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for a in (0.8, 0.9):
                cfg = frn(Activation.alpha_relu(a), 2000)
                b = backward(cfg, forward(cfg, 1.0, 1.0))
                fits[a] = asy.fit_exponent(b.daleth[0] / b.daleth, 500, 2000)
        return fits
    fits, dt = timed(run)
    spots = (asy.grad_exponent_R(0.75), asy.grad_exponent_R(2 / 3))
    fit_ok = all(abs(s - asy.grad_exponent_R(a)) <= 0.1 for a, s in fits.items())
    ok = fit_ok and spots == (4.5, 4.0)
    shown = ", ".join(f"alpha={a}: {s:.4f} vs R={asy.grad_exponent_R(a):.4f}" for a, s in fits.items())
    return report(9, ok, dt, f"slopes {shown} (tol 0.1); R(3/4)={spots[0]!r}, R(2/3)={spots[1]!r}")


def criterion_10():
    def run():
        cfg = frn(RELU, 60)
        return [asy.fit_exponent(1 - forward(cfg, 1.0, e0).e, 20, 60) for e0 in E0_GRID]
    slopes, dt = timed(run)
    ok = all(abs(s + 2) <= 0.2 for s in slopes)
    return report(10, ok, dt, f"slopes of 1 - e on [20, 60]: {min(slopes):.3f}..{max(slopes):.3f} "
                              "vs -2 +- 0.2")


def criterion_11():
    def run():
        cfg = frn(TANH, 200)
        stats = simulate_forward(cfg, SimSpec(1000, 20, seed=0), 1.0, 0.5)
        fwd = compare(forward(cfg, 1.0, 0.5), stats)
        cfg_b = frn(TANH, 50)
        stats_b = simulate_backward(cfg_b, SimSpec(250, 25, seed=0), 1.0)
        bwd = compare(backward(cfg_b, forward(cfg_b, 1.0, 1.0)), stats_b)
        return fwd["p"].frac_within_3, fwd["gamma"].frac_within_3, bwd["daleth"].frac_within_3
    (fp, fg, fd), dt = timed(run)
    ok = fp >= 0.9 and fg >= 0.9 and fd >= 0.85 and dt < 300.0
    return report(11, ok, dt, f"|z|<=3 fraction: p {fp:.3f}, gamma {fg:.3f} (need 0.90); "
                              f"daleth {fd:.3f} (need 0.85), runtime limit 300 s")


def criterion_12():
    def run():
        checks = {}
        cfg = frn(TANH, 20)
        sim = SimSpec(64, 4, seed=7)
        a = simulate_forward(cfg, sim, 1.0, 0.3, threads=1)
        b = simulate_forward(cfg, sim, 1.0, 0.3, threads=3)
        checks["determinism"] = all(a.samples[k].tobytes() == b.samples[k].tobytes() for k in a.samples)
        g, p, pp = a.samples["gamma"], a.samples["p"], a.samples["p_prime"]
        checks["cauchy_schwarz"] = bool(np.all(np.abs(g) <= np.sqrt(p * pp)))
        checks["vdot_tanh_bound"] = all(
            tf.v_dot_transform(TANH, q).value >= 1 / math.sqrt(4 * q + 1)
            for q in (0.01, 0.1, 1.0, 10.0, 100.0))
        cs = np.linspace(0.0, 1.0, 101)
        mono = True
        for al in (0.6, 0.8, 1.0):
            j = np.array([tf.j_alpha(al, c).value for c in cs])
            mono = mono and np.diff(j).min() >= -1e-7 and np.diff(j, 2).min() >= -1e-7
        checks["j_alpha_monotone_convex"] = bool(mono)
        worst = 0.0
        for vv, va in ((1.5, 0.5), (1.0, 0.1), (0.3, 2.0)):
            ref = asy.tanh_frn_fixed_point(vv, va)
            for k in (1e-3, 0.7, 3.0, 1e4):
                r = asy.tanh_frn_fixed_point(k * vv, k * va)
                worst = max(worst, abs(r.e_star - ref.e_star), abs(r.exponent - ref.exponent))
        checks["rho_scale_invariance"] = worst <= 1e-12
        return checks
    checks, dt = timed(run)
    ok = all(checks.values())
    shown = ", ".join(f"{k} {'ok' if v else 'bad'}" for k, v in checks.items())
    return report(12, ok, dt, shown)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(12)])
def test_criterion(criterion):
    assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
