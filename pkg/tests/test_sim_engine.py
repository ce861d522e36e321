"""
Тесты прогона по погоде, КПД, RMS-сравнения и исследования шага.
"""

from __future__ import annotations

import io
import math
from dataclasses import replace

import numpy as np
import pytest
from conftest import DATA_DIR

from pvt.errors import ArgumentError, UndefinedEfficiencyError, ZeroSimulatedValueError
from pvt.model_params import WeatherSeries, load_weather_csv, resample_weather
from pvt.sim_engine import (
    SimulationOptions,
    SimulationRecord,
    hourly_table,
    overall_efficiency,
    rms_deviation,
    run_simulation,
    step_size_study,
    summarize,
    thermal_efficiency,
    write_results_csv,
)
from pvt.thermal_model import derive_coefficients

NO_RAD = SimulationOptions(step=60.0, radiative_correction=False)


def _constant_weather(n_steps: int, step: float, G: float, T_a: float, start: float = 0.0) -> WeatherSeries:
    t = start + step * np.arange(n_steps + 1, dtype=float)
    return WeatherSeries(t=t, G=np.full_like(t, G), T_a=np.full_like(t, T_a))


@pytest.fixture
def clear_day() -> WeatherSeries:
    raw = (DATA_DIR / "weather_synthetic_clear_day.csv").read_bytes()
    return resample_weather(load_weather_csv(raw), 60.0)


def _record(t: float, G: float, T_w: float) -> SimulationRecord:
    return SimulationRecord(t=t, G=G, T_a=30.0, T_w=T_w, T_bs=T_w, T_c=T_w, Q_u=0.0, eta_i=None)


# -----------------------------
# run_simulation
# -----------------------------


def test_equilibrium_stays_at_ambient(design) -> None:
    weather = _constant_weather(10, 60.0, 0.0, 28.0)
    records = run_simulation(design, None, weather, SimulationOptions(step=60.0))
    assert len(records) == 11
    for r in records:
        assert r.T_w == pytest.approx(28.0, abs=1e-9)
        assert r.T_bs == pytest.approx(28.0, abs=1e-9)
        assert r.T_c == pytest.approx(28.0, abs=1e-9)
        assert r.eta_i is None


def test_night_decay_matches_closed_form(design) -> None:
    hot = replace(design, T_w0=50.0)
    weather = _constant_weather(30, 60.0, 0.0, 30.0)
    records = run_simulation(hot, None, weather, NO_RAD)

    m = derive_coefficients(hot, 50.0, 30.0, radiative=False).m_decay
    for r in records:
        assert r.T_w == pytest.approx(30.0 + 20.0 * math.exp(-m * r.t), abs=1e-9)


def test_first_record_is_initial_state(design, clear_day) -> None:
    records = run_simulation(design, None, clear_day, SimulationOptions(step=60.0))
    assert len(records) == len(clear_day)
    assert records[0].T_w == design.T_w0
    assert [r.t for r in records] == clear_day.t.tolist()
    assert all(r.P_mp is None for r in records)


def test_weather_grid_must_match_step(design, clear_day) -> None:
    with pytest.raises(ArgumentError):
        run_simulation(design, None, clear_day, SimulationOptions(step=120.0))


def test_coupling_needs_datasheet(design, clear_day) -> None:
    with pytest.raises(ArgumentError):
        run_simulation(design, None, clear_day, SimulationOptions(step=60.0, couple_electrical=True))


def test_options_reject_non_positive_step() -> None:
    with pytest.raises(ArgumentError):
        SimulationOptions(step=0.0)


def test_electrical_outputs_and_dark_samples(design, datasheet) -> None:
    t = np.arange(0.0, 601.0, 60.0)
    G = np.where(t < 300, 800.0, 0.0)
    weather = WeatherSeries(t=t, G=G, T_a=np.full_like(t, 30.0))
    records = run_simulation(design, datasheet, weather, SimulationOptions(step=60.0))

    for r in records:
        if r.G > 0:
            assert 0.0 < r.eta_e < 0.25
            assert r.P_mp == pytest.approx(r.V_mp * r.I_mp)
        else:
            assert r.eta_e is None
            assert r.P_mp == 0.0


def test_coupled_mode_stays_close_to_constant_efficiency(design, datasheet, clear_day) -> None:
    plain = run_simulation(design, datasheet, clear_day, SimulationOptions(step=60.0))
    coupled = run_simulation(design, datasheet, clear_day, SimulationOptions(step=60.0, couple_electrical=True))

    for a, b in zip(plain, coupled):
        assert abs(a.T_c - b.T_c) < 3.0
        if b.eta_e is not None:
            assert 0.0 <= b.eta_e <= 0.25


def test_runs_are_deterministic(design, datasheet, clear_day) -> None:
    opts = SimulationOptions(step=60.0, couple_electrical=True)
    assert run_simulation(design, datasheet, clear_day, opts) == run_simulation(design, datasheet, clear_day, opts)


def test_tank_energy_bookkeeping(design, clear_day) -> None:
    records = run_simulation(design, None, clear_day, NO_RAD)

    stored = design.M_w * design.C_w * (records[-1].T_w - records[0].T_w)
    flux = [r.Q_u - design.UA_tank * (r.T_w - r.T_a) for r in records]
    integrated = sum(0.5 * (a + b) * 60.0 for a, b in zip(flux, flux[1:]))
    assert stored > 0
    assert integrated == pytest.approx(stored, rel=0.02)


def test_clamp_stops_the_pump_at_night(design) -> None:
    hot = replace(design, T_w0=50.0)
    weather = _constant_weather(10, 60.0, 0.0, 20.0)

    free = run_simulation(hot, None, weather, NO_RAD)
    clamped = run_simulation(hot, None, weather, replace(NO_RAD, clamp_negative_qu=True))

    assert all(r.Q_u < 0 for r in free)
    assert all(r.Q_u == 0.0 for r in clamped)
    assert clamped[-1].T_w > free[-1].T_w

    m_off = design.UA_tank / (design.M_w * design.C_w)
    assert clamped[-1].T_w == pytest.approx(20.0 + 30.0 * math.exp(-m_off * 600.0), abs=1e-9)


# -----------------------------
# КПД
# -----------------------------


def test_thermal_efficiency_example(design) -> None:
    step = 60.0
    n = 420
    G = 8.04e6 / (n * step * design.A_c)
    records = [_record(0.0, G, 28.0)] + [_record(step * k, G, 28.0) for k in range(1, n)]
    records.append(_record(step * n, G, 45.3905))
    weather = _constant_weather(n, step, G, 30.0)

    assert thermal_efficiency(records, design, weather) == pytest.approx(0.4078, abs=5e-4)


def test_thermal_efficiency_edge_cases(design) -> None:
    weather = _constant_weather(2, 60.0, 500.0, 30.0)
    flat = [_record(0.0, 500.0, 28.0), _record(60.0, 500.0, 28.0), _record(120.0, 500.0, 28.0)]
    assert thermal_efficiency(flat, design, weather) == 0.0

    dark = [_record(0.0, 0.0, 28.0), _record(60.0, 0.0, 28.0)]
    with pytest.raises(UndefinedEfficiencyError):
        thermal_efficiency(dark, design, weather)
    with pytest.raises(ArgumentError):
        thermal_efficiency(flat[:1], design, weather)


def test_overall_efficiency() -> None:
    assert overall_efficiency(0.4078, 0.09) == pytest.approx(0.4978)
    assert overall_efficiency(0.0, 0.12) == pytest.approx(0.12)
    assert overall_efficiency(0.3, 0.1) > 0.3
    with pytest.raises(ArgumentError):
        overall_efficiency(1.2, 0.1)


# -----------------------------
# RMS
# -----------------------------


def test_rms_symmetric_and_identical() -> None:
    report = rms_deviation([(0, 10.0), (60, 10.0)], [(0, 9.0), (60, 11.0)])
    assert report.rms_percent == pytest.approx(10.0)
    assert report.n == 2

    same = [(0, 28.0), (60, 29.5), (120, 31.0)]
    assert rms_deviation(same, same).rms_percent == 0.0


def test_rms_single_pair_is_normalised_by_simulation() -> None:
    report = rms_deviation([(0, 50.0)], [(0, 49.0)])
    assert report.rms_percent == pytest.approx(2.0)
    assert report.pairs[0].percent == pytest.approx(2.0)


def test_rms_nearest_timestamp_pairing() -> None:
    sim = [(0, 10.0), (60, 20.0), (120, 30.0)]
    exp = [(29, 10.0), (31, 20.0), (1000, 99.0)]
    report = rms_deviation(sim, exp)
    assert report.n == 2
    assert [p.sim for p in report.pairs] == [10.0, 20.0]

    with pytest.raises(ArgumentError):
        rms_deviation(sim, [(5000, 1.0)])


def test_rms_zero_simulated_value_names_timestamp() -> None:
    with pytest.raises(ZeroSimulatedValueError) as exc:
        rms_deviation([(0, 1.0), (60, 0.0)], [(60, 0.5)])
    assert "t=60" in str(exc.value)


# -----------------------------
# Исследование шага
# -----------------------------


def test_step_study_constant_weather_is_step_independent(design) -> None:
    weather = _constant_weather(120, 60.0, 600.0, 30.0)
    runs = step_size_study(design, None, weather, [60.0, 3600.0], NO_RAD, workers=2)

    assert list(runs) == [60.0, 3600.0]
    assert len(runs[60.0]) == 121
    assert len(runs[3600.0]) == 3
    assert runs[60.0][-1].T_w == pytest.approx(runs[3600.0][-1].T_w, abs=1e-9)


def test_step_study_varying_weather_resolves_more_extrema(design) -> None:
    rng = np.random.default_rng(7)
    t = np.arange(0.0, 4 * 3600.0 + 1, 60.0)
    G = np.clip(600 + 300 * np.sin(2 * np.pi * t / 1800.0) + rng.normal(0, 30, t.size), 0, None)
    weather = WeatherSeries(t=t, G=G, T_a=np.full_like(t, 30.0))
    runs = step_size_study(design, None, weather, [60.0, 3600.0])

    def extrema(values: list[float]) -> int:
        d = np.sign(np.diff(values))
        return int(np.sum(d[1:] * d[:-1] < 0))

    fine = extrema([r.T_c for r in runs[60.0]])
    coarse = extrema([r.T_c for r in runs[3600.0]])
    assert fine >= coarse
    assert runs[60.0][-1].T_w != runs[3600.0][-1].T_w


def test_step_study_edge_cases(design) -> None:
    weather = _constant_weather(10, 60.0, 600.0, 30.0)
    assert step_size_study(design, None, weather, []) == {}
    with pytest.raises(ArgumentError):
        step_size_study(design, None, weather, [70.0])


# -----------------------------
# Отчёты
# -----------------------------


def test_hourly_table(design, clear_day) -> None:
    records = run_simulation(design, None, clear_day, SimulationOptions(step=60.0))
    hourly = hourly_table(records)
    assert [r.t / 3600 for r in hourly] == [8, 9, 10, 11, 12, 13, 14, 15]


def test_summarize_without_sun(design) -> None:
    weather = _constant_weather(5, 60.0, 0.0, 28.0)
    opts = SimulationOptions(step=60.0)
    summary = summarize(run_simulation(design, None, weather, opts), design, weather, opts)
    assert summary["eta_th"] is None
    assert summary["eta_e"] is None
    assert summary["eta_o"] is None
    assert summary["flags"]["radiative_correction"] is True
    assert summary["records"] == 6


def test_summarize_clear_day(design, datasheet, clear_day) -> None:
    opts = SimulationOptions(step=60.0)
    records = run_simulation(design, datasheet, clear_day, opts)
    summary = summarize(records, design, clear_day, opts)
    assert 0.0 < summary["eta_th"] < 1.0
    assert 0.0 < summary["eta_e"] < 0.25
    assert summary["eta_o"] == pytest.approx(summary["eta_th"] + summary["eta_e"])
    assert summary["T_w_final"] > summary["T_w_initial"]


def test_write_results_csv_columns(design, datasheet) -> None:
    weather = _constant_weather(2, 60.0, 800.0, 30.0)

    buf = io.StringIO()
    write_results_csv(run_simulation(design, None, weather, SimulationOptions(step=60.0)), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,G,T_a,T_w,T_bs,T_c,Q_u,eta_i"
    assert len(lines) == 4

    buf = io.StringIO()
    write_results_csv(run_simulation(design, datasheet, weather, SimulationOptions(step=60.0)), buf)
    header, first = buf.getvalue().splitlines()[:2]
    assert header == "t,G,T_a,T_w,T_bs,T_c,Q_u,eta_i,eta_e,P_mp,V_mp,I_mp"
    # 6 значащих цифр
    assert all(len(v.replace(".", "").replace("-", "").lstrip("0")) <= 6 for v in first.split(","))


def test_write_results_csv_time_column_is_plain(design) -> None:
    # месяц в секундах: %g дал бы 2.592e+06
    weather = _constant_weather(2, 60.0, 800.0, 30.0, start=2_592_000.0)
    buf = io.StringIO()
    write_results_csv(run_simulation(design, None, weather, SimulationOptions(step=60.0)), buf, precision=4)
    times = [line.split(",")[0] for line in buf.getvalue().splitlines()[1:]]
    assert times == ["2592000", "2592060", "2592120"]

    buf = io.StringIO()
    write_results_csv([_record(12.5, 0.0, 30.0)], buf)
    assert buf.getvalue().splitlines()[1].startswith("12.5,")
