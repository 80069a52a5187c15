"""Tests for the command-line entry points."""

import json
import math

import pytest

from solarfis.cli import main


def write_yearly_data(path, n=80, start=1900):
    lines = []
    for k in range(n):
        v = 60 + 50 * math.sin(2 * math.pi * k / 11.0) + 0.1 * k
        lines.append(f"{start + k};{max(v, 0.0):.1f}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_config(path, **overrides):
    mapping = {
        "experiment_id": "demo",
        "data_file": "demo_yearly.dat",
        "cadence": "yearly",
        "model": "anfis",
        "rules": "2",
        "epochs": "2",
        "d": "3",
        "horizon": "1",
        "split_mode": "date",
        "split_boundary": "1950",
        "strategy": "open_loop",
        "reference_nmse": "0.111",
    }
    mapping.update({k: str(v) for k, v in overrides.items()})
    path.write_text("\n".join(f"{k} = {v}" for k, v in mapping.items()) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def workspace(tmp_path):
    write_yearly_data(tmp_path / "demo_yearly.dat")
    write_config(tmp_path / "demo.cfg")
    return tmp_path


class TestRunCommand:
    def test_success_prints_summary_and_footer(self, workspace, capsys):
        code = main(["run", str(workspace / "demo.cfg"), "--out", str(workspace / "runs")])
        out = capsys.readouterr().out
        assert code == 0
        assert "demo: anfis[2]" in out
        assert "reference nmse 0.111" in out
        assert (workspace / "runs" / "demo" / "report.json").is_file()

    def test_seed_flag_overrides(self, workspace):
        main(["run", str(workspace / "demo.cfg"), "--out", str(workspace / "runs"), "--seed", "5"])
        manifest = json.loads((workspace / "runs" / "demo" / "manifest.json").read_text())
        assert manifest["seed"] == 5

    def test_error_is_structured_nonzero(self, workspace, capsys):
        write_config(workspace / "bad.cfg", experiment_id="bad", split_boundary="2090")
        code = main(["run", str(workspace / "bad.cfg"), "--out", str(workspace / "runs")])
        err = capsys.readouterr().err
        assert code == 2
        assert err.startswith("error: RangeError:")

    def test_missing_config_nonzero(self, tmp_path, capsys):
        code = main(["run", str(tmp_path / "ghost.cfg")])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestSuiteCommand:
    def test_green_suite_exit_zero(self, workspace, capsys):
        code = main(["suite", str(workspace), "--out", str(workspace / "out")])
        out = capsys.readouterr().out
        assert code == 0
        assert (workspace / "out" / "suite.csv").is_file()
        assert (workspace / "out" / "suite.json").is_file()
        assert "table:" in out

    def test_failing_row_exit_nonzero(self, workspace, capsys):
        write_config(workspace / "bad.cfg", experiment_id="bad", split_boundary="2090")
        code = main(["suite", str(workspace), "--out", str(workspace / "out")])
        out = capsys.readouterr().out
        assert code == 1
        assert "bad: FAILED" in out

    def test_comparison_lines_printed(self, workspace, capsys):
        write_config(workspace / "p_anfis.cfg", experiment_id="pair_anfis")
        write_config(workspace / "p_belfis.cfg", experiment_id="pair_belfis", model="belfis", rules="8")
        code = main(["suite", str(workspace), "--out", str(workspace / "out")])
        out = capsys.readouterr().out
        assert code == 0
        assert "comparison pair:" in out
        assert ("PASS" in out) or ("FAIL" in out)


class TestPlotdataCommand:
    def test_overlay(self, workspace, capsys):
        main(["run", str(workspace / "demo.cfg"), "--out", str(workspace / "runs")])
        forecast = workspace / "runs" / "demo" / "forecast.csv"
        code = main(["plotdata", str(forecast), "--style", "overlay"])
        assert code == 0
        assert forecast.with_name("forecast_overlay.csv").is_file()

    def test_error_curve_from_suite(self, workspace):
        main(["suite", str(workspace), "--out", str(workspace / "out")])
        code = main(
            ["plotdata", str(workspace / "out" / "suite.csv"), "--style", "error-curve",
             "--out", str(workspace / "curve.csv")]
        )
        assert code == 0
        header = (workspace / "curve.csv").read_text().splitlines()[0]
        assert header == "model_id,horizon,nmse"

    def test_malformed_input_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n", encoding="utf-8")
        code = main(["plotdata", str(bad), "--style", "overlay"])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestIngestValidateCommands:
    def test_ingest_writes_csv(self, workspace, capsys):
        out = workspace / "clean.csv"
        code = main(["ingest", str(workspace / "demo_yearly.dat"), "--cadence", "yearly",
                     "--out", str(out)])
        printed = capsys.readouterr().out
        assert code == 0
        assert "80 yearly rows" in printed
        assert out.read_text().splitlines()[1] == "timestamp,value,missing"

    def test_ingest_bad_file_nonzero(self, tmp_path, capsys):
        raw = tmp_path / "garbled.dat"
        raw.write_text("1900;1.0\n1902;2.0\n", encoding="utf-8")
        code = main(["ingest", str(raw), "--cadence", "yearly"])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_validate_ok(self, workspace, capsys):
        code = main(["validate", str(workspace / "demo.cfg")])
        assert code == 0
        assert capsys.readouterr().out.startswith("ok: demo")

    def test_validate_rejects_missing_data(self, workspace, capsys):
        write_config(workspace / "ghost.cfg", experiment_id="ghost", data_file="ghost.dat")
        code = main(["validate", str(workspace / "ghost.cfg")])
        assert code == 2
        assert "ghost.dat" in capsys.readouterr().err
