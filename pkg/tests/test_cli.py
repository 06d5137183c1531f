import json
import math
from importlib import resources

import numpy as np
import pytest

from resnet_mft import verify
from resnet_mft.artifacts import read_csv, write_json
from resnet_mft.cli import main
from resnet_mft.config import MAX_GRID_POINTS, ExperimentConfig, SweepOptions
from resnet_mft.errors import ConfigError
from resnet_mft.nonlin import Activation
from resnet_mft.recurrence import NetConfig, backward, forward
from resnet_mft.sweep import run_sweep

TANH_NET = {"arch": "FRN", "activation": "tanh", "var_w": 1.69, "var_b": 0.49,
            "var_v": 1.5, "var_a": 0.5, "depth": 30}


def write_config(tmp_path, d, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return str(path)


def bundled():
    return sorted(p.name for p in resources.files("resnet_mft").joinpath("configs").iterdir()
                  if p.name.endswith(".json"))


class TestExperimentConfig:
    def test_minimal(self):
        cfg = ExperimentConfig.from_dict({"net": TANH_NET})
        assert cfg.net.depth == 30 and cfg.sim is None
        assert cfg.initial_conditions[0][0] == 1.0
        assert len(cfg.initial_conditions) == 9

    @pytest.mark.parametrize("bad", [
        {"nett": TANH_NET},
        {"net": {**TANH_NET, "width": 3}},
        {"net": TANH_NET, "sim": {"width": 10, "runs": 2, "threads": 4}},
        {"net": TANH_NET, "initial_conditions": [[1.0, 2.0]]},
        {"net": TANH_NET, "initial_conditions": [[0.0, 0.5]]},
        {"net": TANH_NET, "initial_conditions": [1.0, 0.5]},
        {"net": TANH_NET, "verify": {"profile": "everything"}},
        {"net": TANH_NET, "predict": {"daleth_L": 0}},
        {"net": TANH_NET, "predict": {"quadrature": {"scheme": "midpoint"}}},
        {"net": TANH_NET, "simulate": {"forward": "yes"}},
        {"net": TANH_NET, "outputs": 3},
        {"net": {**TANH_NET, "arch": "RRN"}},
    ])
    def test_rejected(self, bad):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)

    def test_invalid_json(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json("{net: 1")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(tmp_path / "nope.json")

    def test_require_net(self):
        with pytest.raises(ConfigError):
            ExperimentConfig().require_net()

    @pytest.mark.parametrize("axes", [{"var_w": [1.0]}, {"var_w": [1.0], "gamma": [1.0]},
                                      {"var_w": [], "depth": [3]}, {"var_w": [1.0], "depth": [2.5]}])
    def test_bad_sweep(self, axes):
        with pytest.raises(ConfigError):
            SweepOptions.from_dict({"axes": axes})

    @pytest.mark.parametrize("name", bundled())
    def test_bundled_configs_parse(self, name):
        text = resources.files("resnet_mft").joinpath("configs", name).read_text()
        cfg = ExperimentConfig.from_json(text)
        assert cfg.net is not None
        assert cfg.figure
        assert cfg.name == name[:-5]


class TestPredict:
    def test_fig1_outputs(self, tmp_path):
        d = {"net": {**TANH_NET, "depth": 200}, "initial_conditions": [[1.0, 0.1], [1.0, 0.5]]}
        out = tmp_path / "o"
        assert main(["predict", "--config", write_config(tmp_path, d), "--out", str(out)]) == 0
        header, rows = read_csv(out / "forward_0.csv")
        assert header == ("layer", "p", "q", "gamma", "lambda", "e", "s")
        assert len(rows) == 201
        summary = json.loads((out / "asymptotics.json").read_text())
        assert summary["fixed_point"]["e_star"] == pytest.approx(0.5, abs=1e-15)
        assert summary["fixed_point"]["delta_star"] == pytest.approx(0.4486711045782079, rel=1e-13)
        assert summary["overflow"] is False
        assert summary["trajectories"][1]["backward_csv"] == "backward_1.csv" or \
            summary["trajectories"][1]["backward_csv"] == "backward_0.csv"
        header, _ = read_csv(out / "backward_0.csv")
        assert header == ("layer", "daleth", "chi_b", "chi_w", "chi_v", "chi_a")

    def test_csv_values_round_trip(self, tmp_path):
        d = {"net": TANH_NET, "initial_conditions": [[1.3, 0.2]]}
        main(["predict", "--config", write_config(tmp_path, d), "--out", str(tmp_path)])
        _, rows = read_csv(tmp_path / "forward_0.csv")
        t = forward(NetConfig.from_dict(TANH_NET), 1.3, 0.2)
        assert np.array(rows)[:, 1].tobytes() == t.p.tobytes()

    def test_rrn_flat_weights(self, tmp_path):
        d = {"net": {"arch": "RRN", "activation": "tanh", "var_w": 0.0, "var_b": 0.3, "depth": 20},
             "initial_conditions": [[1.0, 0.5]]}
        main(["predict", "--config", write_config(tmp_path, d), "--out", str(tmp_path)])
        _, rows = read_csv(tmp_path / "forward_0.csv")
        q = np.array(rows)[1:, 2]
        np.testing.assert_array_equal(q, 0.3)

    def test_relu_overflow_recorded(self, tmp_path):
        d = {"net": {**TANH_NET, "activation": {"kind": "alpha_relu", "alpha": 1.0}, "depth": 1000},
             "initial_conditions": [[1.0, 0.5]]}
        assert main(["predict", "--config", write_config(tmp_path, d), "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "asymptotics.json").read_text())
        assert summary["overflow"] is True
        _, rows = read_csv(tmp_path / "forward_0.csv")
        assert len(rows) == summary["trajectories"][0]["forward_depth"] + 1 < 1001

    def test_alpha_below_half_records_backward_error(self, tmp_path):
        d = {"net": {**TANH_NET, "activation": {"kind": "alpha_relu", "alpha": 0.4}},
             "initial_conditions": [[1.0, 0.5]]}
        assert main(["predict", "--config", write_config(tmp_path, d), "--out", str(tmp_path)]) == 0
        t = json.loads((tmp_path / "asymptotics.json").read_text())["trajectories"][0]
        assert t["backward_csv"] is None and "alpha" in t["backward_error"]

    def test_deterministic(self, tmp_path):
        path = write_config(tmp_path, {"net": TANH_NET, "initial_conditions": [[1.0, 0.5]]})
        main(["predict", "--config", path, "--out", str(tmp_path / "a")])
        main(["predict", "--config", path, "--out", str(tmp_path / "b")])
        for name in ("forward_0.csv", "backward_0.csv", "asymptotics.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestSimulate:
    CFG = {"net": {**TANH_NET, "depth": 8}, "sim": {"width": 64, "runs": 4, "seed": 3},
           "initial_conditions": [[1.0, 0.5]]}

    def test_outputs(self, tmp_path):
        assert main(["simulate", "--config", write_config(tmp_path, self.CFG), "--out", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "sim_forward_0.csv")
        assert header == ("layer", "quantity", "mean", "std", "runs", "width")
        assert rows[0][4:] == (4.0, 64.0)
        assert (tmp_path / "sim_backward_0.csv").exists()
        rep = json.loads((tmp_path / "compare.json").read_text())
        assert set(rep["forward"][0]["compare"]["quantities"]) == {"p", "gamma", "q"}
        assert "daleth" in rep["backward"][0]["compare"]["quantities"]

    def test_same_seed_same_bytes(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, self.CFG)
        main(["simulate", "--config", path, "--out", str(tmp_path / "a")])
        monkeypatch.setenv("RESNET_MFT_THREADS", "3")
        main(["simulate", "--config", path, "--out", str(tmp_path / "b")])
        for name in ("sim_forward_0.csv", "sim_backward_0.csv", "compare.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_needs_sim_section(self, tmp_path):
        path = write_config(tmp_path, {"net": TANH_NET})
        assert main(["simulate", "--config", path, "--out", str(tmp_path)]) == 2


class TestVerify:
    def test_kernel_identities_profile(self, tmp_path):
        assert main(["verify", "--profile", "kernel-identities", "--out", str(tmp_path)]) == 0
        rep = json.loads((tmp_path / "verify.json").read_text())
        assert {c["name"] for c in rep["checks"]} == {"jalpha_recurrence", "jalpha_derivative",
                                                       "lalpha_recurrence"}
        assert rep["passed"] is True

    def test_corrupted_constant_fails(self, tmp_path):
        path = write_config(tmp_path, {"verify": {"profile": "kernel-identities", "c_alpha_scale": 1.001}})
        assert main(["verify", "--config", path, "--out", str(tmp_path)]) == 1
        rep = json.loads((tmp_path / "verify.json").read_text())
        assert not rep["passed"]

    def test_quick_profile_passes(self):
        rep = verify.run("quick")
        assert rep["passed"], [c for c in rep["checks"] if not c["passed"]]

    def test_transforms_profile_passes(self):
        rep = verify.run("transforms")
        assert rep["passed"], [c for c in rep["checks"] if not c["passed"]]

    def test_report_is_reproducible(self, tmp_path):
        main(["verify", "--profile", "quick", "--out", str(tmp_path / "a")])
        main(["verify", "--profile", "quick", "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "verify.json").read_bytes() == (tmp_path / "b" / "verify.json").read_bytes()

    def test_profiles_cover_every_check(self):
        tagged = set()
        for p in ("transforms", "recurrence", "asymptotics", "monte-carlo"):
            tagged.update(verify.checks_for(p))
        assert tagged == set(verify.checks_for("default"))

    def test_crashing_check_counts_as_failure(self, monkeypatch):
        def boom():
            raise RuntimeError("broken")
        monkeypatch.setitem(verify._REGISTRY, "closed_form_v", (("quick",), boom))
        rep = verify.run("quick")
        bad = [c for c in rep["checks"] if c["name"] == "closed_form_v"][0]
        assert not bad["passed"] and "broken" in bad["details"]["error"]


class TestSweep:
    def test_single_point_matches_predict(self, tmp_path):
        net = NetConfig.from_dict(TANH_NET)
        res = run_sweep(net, SweepOptions.from_dict({"axes": {"var_w": [1.69], "depth": [30]},
                                                     "p0": 1.0, "e0": 0.5}))
        f = forward(net, 1.0, 0.5)
        b = backward(net, forward(net, 1.0, 1.0))
        assert res.values["p_L"][0, 0] == f.p[30]
        assert res.values["s_L"][0, 0] == f.s[30]
        assert res.values["e_L"][0, 0] == f.e[30]
        assert res.values["log_daleth_ratio"][0, 0] == math.log(b.daleth[0] / b.daleth[30])

    def test_depth_axis_reuses_deep_run(self):
        net = NetConfig.from_dict(TANH_NET)
        res = run_sweep(net, SweepOptions.from_dict({"axes": {"var_w": [1.69], "depth": [10, 30]}}))
        f = forward(net.replace(depth=10), 1.0, 0.5)
        assert res.values["p_L"][0, 0] == f.p[10]

    def test_tanh_contours_follow_sqrt_law(self, tmp_path):
        d = {"net": {**TANH_NET, "depth": 100},
             "sweep": {"axes": {"var_w": [0.25, 0.5, 1.0, 2.0, 3.0], "depth": [25, 50, 100, 200, 400]},
                       "levels": {"log_daleth_ratio": [15.0]}}}
        assert main(["sweep", "--config", write_config(tmp_path, d), "--out", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "sweep.csv")
        assert header == ("var_w", "depth", "quantity", "value")
        assert len(rows) == 25 * len({r[2] for r in rows})
        cont = json.loads((tmp_path / "contours.json").read_text())["contours"]["log_daleth_ratio"]
        pts = cont["15.0"]
        assert len(pts) >= 3
        prod = [math.sqrt(p["var_w"] * p["depth"]) for p in pts]
        assert max(prod) / min(prod) < 1.25

    def test_alpha_relu_emits_both_contour_families(self):
        net = NetConfig("FRN", Activation.alpha_relu(0.8), 1.69, 0.49, 1.5, 0.5, depth=10)
        res = run_sweep(net, SweepOptions.from_dict({"axes": {"alpha": [0.6, 0.7, 0.8, 0.9],
                                                              "depth": [10, 20, 40]}}))
        assert {"log_chi_w_ratio", "s_L"} <= set(res.contours)

    def test_too_large_grid(self, tmp_path):
        n = int(math.isqrt(MAX_GRID_POINTS)) + 1
        d = {"net": TANH_NET, "sweep": {"axes": {"var_w": [1.0] * n, "var_v": [1.0] * n}}}
        assert main(["sweep", "--config", write_config(tmp_path, d), "--out", str(tmp_path)]) == 2


class TestExitCodes:
    def test_unknown_key(self, tmp_path, capsys):
        path = write_config(tmp_path, {"net": TANH_NET, "bogus": 1})
        assert main(["predict", "--config", path, "--out", str(tmp_path)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["predict", "--config", str(tmp_path / "none.json")]) == 2

    def test_config_required(self):
        with pytest.raises(SystemExit):
            main(["predict"])

    def test_json_writer_nulls_nonfinite(self, tmp_path):
        path = write_json(tmp_path / "x.json", {"a": math.nan, "b": [1.0, math.inf]})
        assert json.loads(path.read_text()) == {"a": None, "b": [1.0, None]}
