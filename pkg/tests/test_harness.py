import time
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from collisim import (
    ConfigError,
    Trajectory,
    load_config,
    metrics,
    parse_config_text,
    run_scenario,
    run_sweep,
)
from collisim.cli import main
from collisim.scenarios import subsample, write_trajectory_csv

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

FIG3B = """
scenario = collision-vs-me
delta = 200
x1 = 1e-4
x2 = 1e-4
alpha_tau = 0.3
n_steps = 60
"""

VERIFY = """
scenario = verify-elimination
delta = 50
n_grid = 400
"""


def constant_trajectory(pops, n=10, dt=1.0):
    arr = np.tile(pops, (n, 1))
    return Trajectory(steps=np.arange(n), times=np.arange(n) * dt, populations=arr)


class TestConfigParsing:
    def test_parses_comments_and_blanks(self):
        cfg = parse_config_text("# comment\n\nscenario = verify-elimination\ndelta = 50  # inline\n")
        assert cfg.scenario == "verify-elimination"
        assert cfg.delta == 50.0

    def test_rejects_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config_text("scenario = verify-elimination\ndelta = 50\nbanana = 1\n")

    def test_rejects_key_not_applicable(self):
        with pytest.raises(ConfigError, match="not applicable"):
            parse_config_text("scenario = verify-elimination\ndelta = 50\ntau = 3\n")

    def test_rejects_missing_required(self):
        with pytest.raises(ConfigError, match="delta"):
            parse_config_text("scenario = verify-elimination\n")

    def test_rejects_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("scenario = verify-elimination\ndelta = 50\ndelta = 60\n")

    def test_rejects_bad_number(self):
        with pytest.raises(ConfigError, match="expected a number"):
            parse_config_text("scenario = verify-elimination\ndelta = fifty\n")

    def test_rejects_unknown_scenario(self):
        with pytest.raises(ConfigError, match="unknown scenario"):
            parse_config_text("scenario = everything\n")

    def test_rejects_missing_scenario(self):
        with pytest.raises(ConfigError, match="scenario"):
            parse_config_text("delta = 50\n")

    def test_rejects_tau_and_alpha_tau_together(self):
        with pytest.raises(ConfigError, match="not both"):
            parse_config_text(FIG3B + "tau = 60\n")

    def test_requires_some_duration(self):
        with pytest.raises(ConfigError, match="tau or alpha_tau"):
            parse_config_text("scenario = collision-vs-me\ndelta = 200\nx1 = 0\nx2 = 0\n")

    def test_effective_tau_from_alpha_tau(self):
        cfg = parse_config_text(FIG3B)
        assert_allclose(cfg.effective_tau(), 60.0)

    def test_custom_initial_state(self):
        cfg = parse_config_text(
            FIG3B + "initial_state = custom\ninitial_populations = 0.2, 0.3, 0.5\n"
        )
        assert cfg.initial_populations == (0.2, 0.3, 0.5)
        with pytest.raises(ConfigError, match="sum to 1"):
            parse_config_text(FIG3B + "initial_state = custom\ninitial_populations = 0.9,0.3,0\n")
        with pytest.raises(ConfigError, match="custom"):
            parse_config_text(FIG3B + "initial_populations = 0.5,0.5,0\n")

    def test_sweep_requires_valid_points(self):
        text = """
scenario = sweep
sweep_scenario = verify-elimination
sweep_param = delta
sweep_values = 25, 0, 100
"""
        # delta = 0 is singular for the eliminated-level builder; the sweep
        # validation must reject it up front.
        with pytest.raises((ConfigError, ValueError)):
            cfg = parse_config_text(text)
            run_sweep(cfg, "/tmp/never-used")

    def test_load_config_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nonexistent/path.cfg")


class TestMetrics:
    def test_identical_trajectories(self):
        a = constant_trajectory([0.5, 0.5, 0.0])
        frag = metrics(a, a)
        assert frag.max_dev == 0.0
        assert frag.mean_abs_dev == (0.0, 0.0, 0.0)

    def test_constant_offset(self):
        a = constant_trajectory([0.5, 0.5, 0.0])
        b = constant_trajectory([0.6, 0.4, 0.0])
        frag = metrics(a, b)
        assert_allclose(frag.max_abs_dev, (0.1, 0.1, 0.0), atol=1e-15)

    def test_rejects_different_grids(self):
        a = constant_trajectory([1.0, 0.0, 0.0], n=10)
        b = constant_trajectory([1.0, 0.0, 0.0], n=20, dt=0.5)
        with pytest.raises(ValueError, match="resampling"):
            metrics(a, b)

    def test_resamples_fine_grid(self):
        a = constant_trajectory([1.0, 0.0, 0.0], n=5, dt=2.0)
        b = constant_trajectory([1.0, 0.0, 0.0], n=9, dt=1.0)
        frag = metrics(a, b, allow_resample=True)
        assert frag.max_dev == 0.0

    def test_subsample_renumbers_steps(self):
        b = constant_trajectory([1.0, 0.0, 0.0], n=9, dt=1.0)
        sub = subsample(b, 2)
        assert list(sub.steps) == [0, 1, 2, 3, 4]
        assert_allclose(sub.times, [0, 2, 4, 6, 8])


class TestScenarioOutputs:
    def test_csv_schema(self, tmp_path):
        traj = constant_trajectory([0.25, 0.75, 0.0], n=3)
        path = tmp_path / "t.csv"
        write_trajectory_csv(path, traj, "orig")
        lines = path.read_text().splitlines()
        assert lines[0] == "step,t_in_inverse_g,p0,p1,p2,source"
        assert lines[1] == "0,0,0.25,0.75,0,orig"
        assert len(lines) == 4

    def test_verify_elimination_files(self, tmp_path):
        cfg = parse_config_text(VERIFY)
        report = run_scenario(cfg, tmp_path)
        assert report.passed
        for name in ("orig.csv", "eff.csv", "report.txt", "report.kv"):
            assert (tmp_path / name).is_file()
        kv = (tmp_path / "report.kv").read_text()
        assert "passed = true" in kv
        assert "max_dev_p0 = " in kv

    def test_collision_vs_me_grid_alignment(self, tmp_path):
        cfg = parse_config_text(FIG3B)
        run_scenario(cfg, tmp_path)
        orig = (tmp_path / "orig.csv").read_text().splitlines()
        me = (tmp_path / "me5.csv").read_text().splitlines()
        assert len(orig) == len(me) == 62
        # same collision-time stamps on both curves
        t_orig = [line.split(",")[1] for line in orig[1:]]
        t_me = [line.split(",")[1] for line in me[1:]]
        assert t_orig == t_me

    def test_deterministic_outputs(self, tmp_path):
        cfg = parse_config_text(FIG3B)
        run_scenario(cfg, tmp_path / "a")
        run_scenario(cfg, tmp_path / "b")
        for name in ("orig.csv", "me5.csv", "report.kv", "report.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_sweep_outputs(self, tmp_path):
        cfg = parse_config_text(
            "scenario = sweep\nsweep_scenario = verify-elimination\n"
            "sweep_param = delta\nsweep_values = 25, 50\nn_grid = 300\n"
        )
        report = run_sweep(cfg, tmp_path)
        assert report.passed
        index = (tmp_path / "index.csv").read_text().splitlines()
        assert index[0].startswith("point,delta,")
        assert len(index) == 3
        assert (tmp_path / "point_000_delta_25" / "orig.csv").is_file()
        assert (tmp_path / "point_001_delta_50" / "report.kv").is_file()

    def test_run_scenario_rejects_sweep(self, tmp_path):
        cfg = parse_config_text(
            "scenario = sweep\nsweep_scenario = verify-elimination\n"
            "sweep_param = delta\nsweep_values = 50\n"
        )
        with pytest.raises(ConfigError):
            run_scenario(cfg, tmp_path)


class TestShippedConfigs:
    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.cfg")), ids=lambda p: p.stem)
    def test_validates_and_completes_in_budget(self, path, tmp_path):
        cfg = load_config(path)
        start = time.time()
        if cfg.scenario == "sweep":
            run_sweep(cfg, tmp_path)
        else:
            run_scenario(cfg, tmp_path)
        assert time.time() - start < 60.0


class TestCli:
    def write(self, tmp_path, text, name="cfg.txt"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    def test_validate_ok(self, tmp_path, capsys):
        path = self.write(tmp_path, VERIFY)
        assert main(["validate", path]) == 0
        assert "OK" in capsys.readouterr().out

    def test_validate_bad_config(self, tmp_path, capsys):
        path = self.write(tmp_path, "scenario = verify-elimination\n")
        assert main(["validate", path]) == 2
        assert "delta" in capsys.readouterr().err

    def test_run_pass(self, tmp_path, capsys):
        path = self.write(tmp_path, VERIFY)
        assert main(["run", path, "--output-dir", str(tmp_path / "out")]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_run_tolerance_fail(self, tmp_path, capsys):
        # short-collision regime: the effective-qubit equation misses the
        # top-level population, reported as a tolerance failure
        text = """
scenario = collision-vs-me
delta = 200
x1 = 1e-4
x2 = 1e-4
alpha_tau = 0.01
n_steps = 40000
"""
        path = self.write(tmp_path, text)
        assert main(["run", path, "--output-dir", str(tmp_path / "out")]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.cfg")]) == 2

    def test_run_rejects_sweep_config(self, tmp_path, capsys):
        path = self.write(
            tmp_path,
            "scenario = sweep\nsweep_scenario = verify-elimination\n"
            "sweep_param = delta\nsweep_values = 50\n",
        )
        assert main(["run", path]) == 2
        assert main(["sweep", path, "--output-dir", str(tmp_path / "s")]) == 0

    def test_sweep_rejects_run_config(self, tmp_path):
        path = self.write(tmp_path, VERIFY)
        assert main(["sweep", path]) == 2

    def test_usage_error(self):
        assert main(["frobnicate"]) == 2
