"""Command-line surface: config parsing, the echo round-trip, per-command
output files, and the exit-code contract."""

import json

import numpy as np
import pytest

import extrusim as ex
from extrusim.cli import OUTDIR_ENV, format_config, main, parse_config
from extrusim.errors import ConfigError

VIOLENT = "[perturbation]\neps = 0.5\nomega = 50\n\n[sim]\nmode = compensated-full\nhorizon = 0.01\n"
ESCAPE = "[sim]\nmode = open-loop\nx0 = 0.19\nu0 = 0.9\ntau = 0.01\nhorizon = 0.05\n"
QUICK = "[sim]\nmode = compensated-full\nhorizon = 0.02\n"


class TestParseConfig:
    def test_empty_text_gives_the_standard_scenario(self):
        cfg = parse_config("")
        assert cfg.mode == "compensated-full"
        assert cfg.params == ex.default_params()
        assert cfg.pert == ex.Perturbation(0.1, 3.5)
        assert cfg.x0 == 0.1 and cfg.tau == 1e-4 and cfg.horizon == 2.0
        assert cfg.setpoint.S == pytest.approx(36.31940055971833, rel=1e-12)
        assert cfg.seed == 0

    @pytest.mark.parametrize(
        "text",
        [
            "[extruder]\nL = 0.2\n",
            "[model]\nQ = 1.0\n",
            "[model]\nl = 0.2\n",  # keys are case sensitive
            "[model]\nL = abc\n",
            "[model]\ntime_unit = sec\n",
            "[perturbation]\neps = 1.0\n",
            "[sim]\nmode = warp\n",
            "[sim]\nseed = 1.5\n",
            "no section header\n",
        ],
    )
    def test_rejected_configs(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_slope_below_floor_reports_the_floor(self):
        with pytest.raises(ConfigError, match="6.3194"):
            parse_config("[setpoint]\nS = 6.0\n")

    def test_explicit_slope_just_above_floor_is_accepted(self):
        cfg = parse_config("[setpoint]\nS = 6.3204\n")
        assert cfg.setpoint.S == 6.3204


class TestEchoRoundTrip:
    def test_default_scenario(self):
        cfg = parse_config("")
        assert parse_config(format_config(cfg)) == cfg

    def test_awkward_values_survive(self):
        text = (
            "[model]\nL = 0.21\nKd = 5.5e-8\nS_eff = 3e-4\neta = 1.1e-3\n\n"
            "[perturbation]\neps = 0.25\nomega = 1.7\n\n"
            "[setpoint]\nx_star = 0.11\nv_max = 0.81\nS = 44.5\n\n"
            "[sim]\nmode = uncompensated\nx0 = 0.07\nu0 = 0.3\ntau = 7.3e-5\nhorizon = 0.61\nseed = 9\n"
        )
        cfg = parse_config(text)
        assert cfg.params.S_eff == 3e-4 and cfg.params.eta == 1.1e-3
        echoed = format_config(cfg)
        assert parse_config(echoed) == cfg
        assert "S_eff" in echoed and "time_unit = min" in echoed

    def test_optional_fields_are_omitted_when_unset(self):
        echoed = format_config(parse_config(""))
        assert "S_eff" not in echoed and "eta" not in echoed


class TestExitCodes:
    def test_bad_config_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[model]\nQ = 1\n")
        assert main(["simulate", str(bad), "-o", str(tmp_path)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_missing_config_exits_one(self, tmp_path):
        assert main(["simulate", str(tmp_path / "nope.cfg"), "-o", str(tmp_path)]) == 1

    def test_feasibility_violation_exits_two(self, tmp_path, capsys):
        cfg = tmp_path / "violent.cfg"
        cfg.write_text(VIOLENT)
        assert main(["simulate", str(cfg), "-o", str(tmp_path)]) == 2
        assert "feasibility violation" in capsys.readouterr().err

    def test_numerical_failure_exits_three(self, tmp_path, capsys):
        cfg = tmp_path / "escape.cfg"
        cfg.write_text(ESCAPE)
        assert main(["simulate", str(cfg), "-o", str(tmp_path)]) == 3
        assert "numerical failure" in capsys.readouterr().err


class TestSimulateCommand:
    def test_writes_csv_and_manifest(self, tmp_path, capsys):
        cfg = tmp_path / "quick.cfg"
        cfg.write_text(QUICK)
        assert main(["simulate", str(cfg), "-o", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "wrote" in out

        series = ex.TimeSeries.from_csv(tmp_path / "quick.csv")
        assert len(series) == 201

        manifest = json.loads((tmp_path / "quick.manifest.json").read_text())
        assert manifest["mode"] == "compensated-full"
        assert manifest["rows"] == 201
        assert manifest["units"] == {
            "time": "min",
            "length": "m",
            "input": "normalized screw speed",
        }
        assert manifest["verdicts"]["feasibility"]["satisfied"] is True
        assert manifest["verdicts"]["gains"]["a_l"] == pytest.approx(56.10857611566449, rel=1e-9)
        assert manifest["verdicts"]["backstepping_residual"] == 0.0
        assert manifest["versions"]["extrusim"] == ex.__version__
        # the echoed config reproduces the run's configuration exactly
        echoed = parse_config(manifest["config_echo"])
        assert echoed == parse_config(QUICK)

    def test_overrides_land_in_the_echo(self, tmp_path):
        cfg = tmp_path / "quick.cfg"
        cfg.write_text(QUICK)
        code = main(
            ["simulate", str(cfg), "-o", str(tmp_path), "--mode", "open-loop",
             "--horizon", "0.01", "--name", "alt"]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "alt.manifest.json").read_text())
        echoed = parse_config(manifest["config_echo"])
        assert echoed.mode == "open-loop" and echoed.horizon == 0.01
        assert "gains" not in manifest["verdicts"]
        assert (tmp_path / "alt.csv").exists()

    def test_outdir_env_fallback(self, tmp_path, monkeypatch):
        cfg = tmp_path / "quick.cfg"
        cfg.write_text(QUICK)
        dest = tmp_path / "fromenv"
        monkeypatch.setenv(OUTDIR_ENV, str(dest))
        assert main(["simulate", str(cfg), "--horizon", "0.01"]) == 0
        assert (dest / "quick.csv").exists()


class TestReportingCommands:
    def test_gains_output(self, capsys):
        assert main(["gains"]) == 0
        out = capsys.readouterr().out
        assert "S_min = 6.319400" in out
        assert "a_l = 56.108576" in out
        assert "a_r = 143.21494" in out

    def test_feasibility_output(self, capsys):
        assert main(["feasibility"]) == 0
        out = capsys.readouterr().out
        assert "satisfied (increasing)" in out
        assert "intensity = 0.432099" in out

    def test_feasibility_reports_inconclusive_without_failing(self, tmp_path, capsys):
        cfg = tmp_path / "loud.cfg"
        cfg.write_text("[perturbation]\neps = 0.5\nomega = 5.0\n")
        assert main(["feasibility", str(cfg)]) == 0
        assert "not satisfied" in capsys.readouterr().out

    def test_pde_validate_passes_at_base_resolution(self, capsys):
        assert main(["pde-validate", "--cells", "50"]) == 0
        out = capsys.readouterr().out
        assert "refinement ratio" in out
        assert "50 cells" in out and "100 cells" in out


class TestPlotdata:
    def test_panel_extracts(self, tmp_path, capsys):
        cfg = tmp_path / "quick.cfg"
        cfg.write_text(QUICK)
        main(["simulate", str(cfg), "-o", str(tmp_path)])
        capsys.readouterr()
        assert main(["plotdata", str(tmp_path / "quick.csv"), "-o", str(tmp_path / "panels")]) == 0
        headers = {
            "input": "t,U,U_eff",
            "state": "t,x,P,e",
            "delay": "t,D,dDdt",
            "flow": "t,flow",
            "monitor": "t,F",
        }
        for panel, header in headers.items():
            path = tmp_path / "panels" / f"quick_{panel}.csv"
            lines = path.read_text().splitlines()
            assert lines[0] == header
            assert len(lines) == 202  # header plus one row per step
        block = np.loadtxt(tmp_path / "panels" / "quick_input.csv", delimiter=",", skiprows=1)
        series = ex.TimeSeries.from_csv(tmp_path / "quick.csv")
        np.testing.assert_array_equal(block[:, 1], series.U)


class TestBatch:
    def test_mixed_directory(self, tmp_path, capsys):
        jobs = tmp_path / "jobs"
        jobs.mkdir()
        (jobs / "a.cfg").write_text("[sim]\nmode = open-loop\nhorizon = 0.02\n")
        (jobs / "b.cfg").write_text("[sim]\nmode = uncompensated\nhorizon = 0.02\n")
        (jobs / "broken.cfg").write_text("[model]\nQ = 1\n")
        out = tmp_path / "out"
        assert main(["batch", str(jobs), "-o", str(out), "--workers", "2"]) == 1
        summary = json.loads((out / "batch_summary.json").read_text())
        assert [r["name"] for r in summary] == ["a", "b", "broken"]
        assert [r["exit_code"] for r in summary] == [0, 0, 1]
        assert (out / "a.csv").exists() and (out / "b.csv").exists()
        assert not (out / "broken.csv").exists()

    def test_empty_directory_is_a_config_error(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["batch", str(empty), "-o", str(tmp_path)]) == 1
        assert main(["batch", str(tmp_path / "missing"), "-o", str(tmp_path)]) == 1
