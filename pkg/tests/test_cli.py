"""
Тесты командной строки через click.testing.CliRunner.

Логи идут в stderr, поэтому JSON разбираем из result.stdout.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import pandas as pd
import pytest
from click.testing import CliRunner
from conftest import DATA_DIR

from pvt.cli import cli

DESIGN = str(DATA_DIR / "collector_reference.json")
DATASHEET = str(DATA_DIR / "msx60.json")
WEATHER = str(DATA_DIR / "weather_synthetic_clear_day.csv")


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def test_extract_prints_reference_params(runner: CliRunner) -> None:
    result = runner.invoke(cli, ["extract", "--datasheet", DATASHEET])
    assert result.exit_code == 0, result.output
    data = json.loads(result.stdout)
    assert data["a_ref"] == pytest.approx(1.435, abs=0.002)
    assert data["R_s"] == pytest.approx(0.102, abs=0.01)


def test_extract_inconsistent_datasheet_exits_1(runner: CliRunner, tmp_path: Path) -> None:
    doc = json.loads(Path(DATASHEET).read_text())
    doc["V_mp_ref"] = 21.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))

    result = runner.invoke(cli, ["extract", "--datasheet", str(bad)])
    assert result.exit_code == 1
    assert "error:" in result.stderr


def test_usage_errors_exit_2(runner: CliRunner, tmp_path: Path) -> None:
    out = str(tmp_path / "out.csv")
    result = runner.invoke(cli, ["simulate", "--design", DESIGN, "--weather", WEATHER, "--step", "0", "--out", out])
    assert result.exit_code == 2
    assert not Path(out).exists()

    result = runner.invoke(cli, ["iv-curve", "--datasheet", DATASHEET, "--temps", "25", "--irr", "1000", "--points", "1"])
    assert result.exit_code == 2

    result = runner.invoke(cli, ["mpp", "--temp", "25", "--irr", "1000"])
    assert result.exit_code == 2

    result = runner.invoke(cli, ["iv-curve", "--datasheet", DATASHEET, "--temps", "25,hot", "--irr", "1000"])
    assert result.exit_code == 2


def test_bad_env_setting_exits_1(runner: CliRunner) -> None:
    result = runner.invoke(cli, ["extract", "--datasheet", DATASHEET], env={"PVT_STEP_S": "fast"})
    assert result.exit_code == 1
    assert "PVT_STEP_S" in result.stderr


def test_simulate_writes_csv_and_summary(runner: CliRunner, tmp_path: Path) -> None:
    out = tmp_path / "run.csv"
    hourly = tmp_path / "hourly.csv"
    result = runner.invoke(
        cli,
        [
            "simulate",
            "--design", DESIGN,
            "--datasheet", DATASHEET,
            "--weather", WEATHER,
            "--out", str(out),
            "--hourly-out", str(hourly),
        ],
    )
    assert result.exit_code == 0, result.output

    summary = json.loads(result.stdout)
    assert 0.0 < summary["eta_th"] < 1.0
    assert summary["eta_o"] == pytest.approx(summary["eta_th"] + summary["eta_e"])
    assert summary["flags"]["step"] == 60.0
    assert "version" in summary

    df = pd.read_csv(out)
    assert list(df.columns)[-4:] == ["eta_e", "P_mp", "V_mp", "I_mp"]
    assert len(df) == summary["records"] == 7 * 60 + 1
    assert len(pd.read_csv(hourly)) == 8


def test_simulate_without_sun_has_null_thermal_efficiency(runner: CliRunner, tmp_path: Path) -> None:
    weather = tmp_path / "night.csv"
    weather.write_text("time,irradiance,ambient\n0,0,28\n600,0,28\n")
    out = tmp_path / "run.csv"

    result = runner.invoke(cli, ["simulate", "--design", DESIGN, "--weather", str(weather), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["eta_th"] is None


def test_simulate_env_step_and_flags(runner: CliRunner, tmp_path: Path) -> None:
    out = tmp_path / "run.csv"
    result = runner.invoke(
        cli,
        ["simulate", "--design", DESIGN, "--weather", WEATHER, "--no-rad", "--clamp", "--out", str(out)],
        env={"PVT_STEP_S": "600"},
    )
    assert result.exit_code == 0, result.output
    flags = json.loads(result.stdout)["flags"]
    assert flags["step"] == 600.0
    assert flags["radiative_correction"] is False
    assert flags["clamp_negative_qu"] is True
    assert len(pd.read_csv(out)) == 43


def test_validate_identical_traces(runner: CliRunner, tmp_path: Path) -> None:
    out = tmp_path / "run.csv"
    runner.invoke(cli, ["simulate", "--design", DESIGN, "--weather", WEATHER, "--out", str(out)])

    result = runner.invoke(cli, ["validate", "--sim", str(out), "--exp", str(out), "--column", "T_w"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["rms_percent"] == 0.0
    assert report["n"] == 421
    assert report["column"] == "T_w"
    assert "pairs" not in report


def test_validate_residuals_and_missing_column(runner: CliRunner, tmp_path: Path) -> None:
    sim = tmp_path / "sim.csv"
    exp = tmp_path / "exp.csv"
    sim.write_text("t,T_w\n0,10\n60,10\n")
    exp.write_text("time,T_w\n0,9\n60,11\n")

    result = runner.invoke(cli, ["validate", "--sim", str(sim), "--exp", str(exp), "--column", "T_w", "--residuals"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["rms_percent"] == pytest.approx(10.0)
    assert [p["percent"] for p in report["pairs"]] == pytest.approx([10.0, -10.0])

    result = runner.invoke(cli, ["validate", "--sim", str(sim), "--exp", str(exp), "--column", "T_c"])
    assert result.exit_code == 1


def test_iv_curve_to_stdout(runner: CliRunner) -> None:
    result = runner.invoke(
        cli,
        ["iv-curve", "--datasheet", DATASHEET, "--temps", "25,75", "--irr", "1000", "--points", "10"],
    )
    assert result.exit_code == 0, result.output
    lines = result.stdout.splitlines()
    assert lines[0] == "T_c,G,V,I,P"
    assert len(lines) == 1 + 2 * 10


def test_iv_curve_from_hourly_gives_one_curve_per_hour(runner: CliRunner, tmp_path: Path) -> None:
    hourly = tmp_path / "hourly.csv"
    result = runner.invoke(
        cli,
        [
            "simulate",
            "--design", DESIGN,
            "--datasheet", DATASHEET,
            "--weather", WEATHER,
            "--out", str(tmp_path / "run.csv"),
            "--hourly-out", str(hourly),
        ],
    )
    assert result.exit_code == 0, result.output
    table = pd.read_csv(hourly)

    result = runner.invoke(cli, ["iv-curve", "--datasheet", DATASHEET, "--from-hourly", str(hourly), "--points", "10"])
    assert result.exit_code == 0, result.output
    curves = pd.read_csv(io.StringIO(result.stdout))
    assert len(curves) == len(table) * 10 == 80

    firsts = curves.iloc[::10]
    assert firsts["T_c"].tolist() == pytest.approx(table["T_c"].tolist(), rel=1e-5)
    assert firsts["G"].tolist() == pytest.approx(table["G"].tolist())
    assert (firsts["V"] == 0.0).all()


@pytest.mark.parametrize(
    "extra",
    [[], ["--temps", "25"], ["--temps", "25", "--irr", "1000", "--from-hourly", WEATHER]],
)
def test_iv_curve_needs_grid_or_hourly_table(runner: CliRunner, extra: list[str]) -> None:
    result = runner.invoke(cli, ["iv-curve", "--datasheet", DATASHEET, *extra])
    assert result.exit_code == 2


def test_mpp_with_design(runner: CliRunner) -> None:
    result = runner.invoke(
        cli, ["mpp", "--datasheet", DATASHEET, "--temp", "25", "--irr", "1000", "--design", DESIGN]
    )
    assert result.exit_code == 0, result.output
    data = json.loads(result.stdout)
    assert data["P_mp"] == pytest.approx(59.85, rel=0.05)
    assert data["eta_e"] == pytest.approx(data["P_mp"] / (0.516 * 1000.0))

    dark = json.loads(runner.invoke(cli, ["mpp", "--datasheet", DATASHEET, "--temp", "25", "--irr", "0"]).stdout)
    assert dark["P_mp"] == 0.0
    assert "eta_e" not in dark


def test_coeffs(runner: CliRunner) -> None:
    result = runner.invoke(cli, ["coeffs", "--design", DESIGN, "--tc", "45", "--ta", "30", "--no-rad"])
    assert result.exit_code == 0, result.output
    data = json.loads(result.stdout)
    assert data["U_t"] == pytest.approx(9.24)
    assert data["F_R"] == pytest.approx(0.930, abs=0.005)


def test_study_csv(runner: CliRunner, tmp_path: Path) -> None:
    out = tmp_path / "study.csv"
    result = runner.invoke(
        cli,
        ["study", "--design", DESIGN, "--weather", WEATHER, "--steps", "600,3600", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output

    df = pd.read_csv(out)
    assert list(df.columns)[0] == "step"
    assert df.groupby("step").size().to_dict() == {600.0: 43, 3600.0: 8}

    result = runner.invoke(cli, ["study", "--design", DESIGN, "--weather", WEATHER, "--steps", "7000"])
    assert result.exit_code == 1
