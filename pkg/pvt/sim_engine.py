"""
Прогон связанной тепловой/электрической модели по погодному ряду.

Порядок на каждом интервале (k-1, k]:
1) коэффициенты с T_c прошлого шага;
2) G и T_a усредняются по интервалу;
3) f и шаг бака -> новая T_w;
4) T_bs, затем T_c при G_k, T_a_k;
5) Q_u и мгновенный КПД;
6) если есть паспорт модуля, MPP при (G_k, T_c); в связанном режиме его КПД
   идёт в уравнение T_c следующего шага (явное запаздывание на шаг).

Один прогон строго последовательный. Разные прогоны (шаги, варианты) можно
запускать параллельно, общего изменяемого состояния нет.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import IO, Any, Optional, Sequence

import numpy as np
import pandas as pd

from pvt.electrical_model import (
    ReferenceParams,
    Variant,
    build_diode_model,
    electrical_efficiency,
    extract_reference_params,
    max_power_point,
)
from pvt.errors import ArgumentError, SolverError, UndefinedEfficiencyError, ZeroSimulatedValueError
from pvt.model_params import CollectorDesign, DatasheetSpec, WeatherSeries, resample_weather
from pvt.thermal_model import (
    DerivedCoefficients,
    derive_coefficients,
    step_tank,
    tank_forcing,
    thermal_state,
    useful_energy,
)

logger = logging.getLogger("pvt.sim_engine")

THERMAL_COLUMNS = ("t", "G", "T_a", "T_w", "T_bs", "T_c", "Q_u", "eta_i")
ELECTRICAL_COLUMNS = ("eta_e", "P_mp", "V_mp", "I_mp")
TIME_COLUMNS = ("t", "step")


@dataclass(frozen=True)
class SimulationOptions:
    step: float = 60.0  # s
    radiative_correction: bool = True
    edge_loss: bool = True
    couple_electrical: bool = False
    clamp_negative_qu: bool = False
    # MPP по каждому отсчёту без обратной связи в тепловую модель
    electrical_outputs: bool = True
    variant: Variant = "series_shunt"

    def __post_init__(self) -> None:
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ArgumentError(f"step must be > 0, got {self.step}")

    def flags(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "radiative_correction": self.radiative_correction,
            "edge_loss": self.edge_loss,
            "couple_electrical": self.couple_electrical,
            "clamp_negative_qu": self.clamp_negative_qu,
            "electrical_outputs": self.electrical_outputs,
            "variant": self.variant,
        }


@dataclass(frozen=True)
class SimulationRecord:
    t: float
    G: float
    T_a: float
    T_w: float
    T_bs: float
    T_c: float
    Q_u: float
    eta_i: Optional[float]  # None при G = 0
    eta_e: Optional[float] = None
    P_mp: Optional[float] = None
    V_mp: Optional[float] = None
    I_mp: Optional[float] = None


@dataclass(frozen=True)
class ValidationPair:
    t: float
    sim: float
    exp: float
    percent: float


@dataclass(frozen=True)
class ValidationReport:
    rms_percent: float
    n: int
    pairs: tuple[ValidationPair, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "rms_percent": self.rms_percent,
            "n": self.n,
            "pairs": [asdict(p) for p in self.pairs],
        }


# -----------------------------
# Прогон
# -----------------------------


class _Electrical:
    """MPP-постобработка и обратная связь по КПД элемента."""

    def __init__(self, design: CollectorDesign, ds: DatasheetSpec, ref: ReferenceParams, variant: Variant) -> None:
        self._design = design
        self._ds = ds
        self._ref = ref
        self._variant = variant

    def evaluate(self, G: float, T_c: float) -> dict[str, Optional[float]]:
        if G <= 0:
            return {"eta_e": None, "P_mp": 0.0, "V_mp": 0.0, "I_mp": 0.0}
        model = build_diode_model(self._ds, self._ref, G, T_c, self._variant)
        mpp = max_power_point(model)
        return {
            "eta_e": electrical_efficiency(mpp, self._design.A_c, G),
            "P_mp": mpp.P,
            "V_mp": mpp.V,
            "I_mp": mpp.I,
        }


def _check_grid(weather: WeatherSeries, step: float) -> None:
    grid_step = weather.uniform_step
    if grid_step is None or not math.isclose(grid_step, step, rel_tol=1e-9, abs_tol=1e-9):
        raise ArgumentError(
            f"weather grid step {grid_step} does not match step {step}; resample the series first"
        )


def _tank_step(
    design: CollectorDesign,
    coeffs: DerivedCoefficients,
    opts: SimulationOptions,
    T_w: float,
    G_avg: float,
    Ta_avg: float,
    dt: float,
) -> float:
    if opts.clamp_negative_qu and useful_energy(coeffs, design, G_avg, Ta_avg, T_w) < 0:
        # насос стоит: бак теряет тепло только через свою изоляцию
        m_off = design.UA_tank / (design.M_w * design.C_w)
        return step_tank(T_w, m_off * Ta_avg, m_off, dt)
    return step_tank(T_w, tank_forcing(coeffs, design, G_avg, Ta_avg), coeffs.m_decay, dt)


def run_simulation(
    design: CollectorDesign,
    datasheet: Optional[DatasheetSpec],
    weather: WeatherSeries,
    opts: SimulationOptions,
) -> list[SimulationRecord]:
    """
    Один прогон по сетке погоды (шаг сетки должен совпадать с opts.step).

    Возвращает по записи на каждый отсчёт, первая содержит начальное состояние T_w0.
    """
    _check_grid(weather, opts.step)
    if opts.couple_electrical and datasheet is None:
        raise ArgumentError("couple_electrical needs a datasheet")

    electrical: Optional[_Electrical] = None
    if datasheet is not None and (opts.electrical_outputs or opts.couple_electrical):
        electrical = _Electrical(design, datasheet, extract_reference_params(datasheet), opts.variant)

    started = time.perf_counter()
    t_arr, g_arr, ta_arr = weather.t, weather.G, weather.T_a

    records: list[SimulationRecord] = []
    eta_c = design.eta_c_ref
    T_w = design.T_w0
    T_c_prev = design.T_w0

    for k in range(len(weather)):
        G, T_a = float(g_arr[k]), float(ta_arr[k])

        if k == 0:
            coeffs = derive_coefficients(
                design, T_c_prev, T_a,
                eta_c=eta_c, radiative=opts.radiative_correction, edge_loss=opts.edge_loss,
            )
        else:
            G_avg = 0.5 * float(g_arr[k - 1] + g_arr[k])
            Ta_avg = 0.5 * float(ta_arr[k - 1] + ta_arr[k])
            coeffs = derive_coefficients(
                design, T_c_prev, Ta_avg,
                eta_c=eta_c, radiative=opts.radiative_correction, edge_loss=opts.edge_loss,
            )
            T_w = _tank_step(design, coeffs, opts, T_w, G_avg, Ta_avg, opts.step)

        state = thermal_state(coeffs, design, G, T_a, T_w, clamp_negative_qu=opts.clamp_negative_qu)

        extra: dict[str, Optional[float]] = {}
        if electrical is not None:
            try:
                extra = electrical.evaluate(G, state.T_c)
            except SolverError as e:
                raise SolverError(str(e), step_index=k) from e
            if opts.couple_electrical and extra["eta_e"] is not None:
                eta_c = extra["eta_e"]

        records.append(SimulationRecord(t=float(t_arr[k]), G=G, T_a=T_a, **asdict(state), **extra))
        T_c_prev = state.T_c

    logger.info(
        "simulation done records=%s step_s=%s rad=%s edge=%s coupled=%s duration_ms=%s",
        len(records),
        opts.step,
        opts.radiative_correction,
        opts.edge_loss,
        opts.couple_electrical,
        int((time.perf_counter() - started) * 1000),
    )
    return records


# -----------------------------
# КПД
# -----------------------------


def thermal_efficiency(records: Sequence[SimulationRecord], design: CollectorDesign, weather: WeatherSeries) -> float:
    """
    Тепловой КПД за весь прогон: нагрев бака / падающая энергия.

    Падающая энергия = Σ G_k · step · A_c по отсчётам, закрывающим интервалы
    (все кроме первого).
    """
    if len(records) < 2:
        raise ArgumentError("thermal efficiency needs at least 2 records")
    step = weather.uniform_step
    if step is None:
        raise ArgumentError("thermal efficiency needs a uniform weather step")

    insolation = sum(r.G for r in records[1:]) * step * design.A_c
    if insolation <= 0:
        raise UndefinedEfficiencyError("zero insolation over the run")
    heat = design.M_w * design.C_w * (records[-1].T_w - records[0].T_w)
    return heat / insolation


def overall_efficiency(eta_th: float, eta_e: float) -> float:
    for name, value in (("eta_th", eta_th), ("eta_e", eta_e)):
        if not 0 <= value <= 1:
            raise ArgumentError(f"{name} must be in [0, 1], got {value}")
    return eta_th + eta_e


# -----------------------------
# Сравнение с экспериментом
# -----------------------------


def rms_deviation(
    sim: Sequence[tuple[float, float]],
    exp: Sequence[tuple[float, float]],
    tolerance: Optional[float] = None,
) -> ValidationReport:
    """
    RMS процентного отклонения, нормированного на симулированное значение.

    Каждая экспериментальная точка берёт ближайший по времени симулированный
    отсчёт, если он ближе tolerance (по умолчанию половина шага симуляции).
    """
    if not sim or not exp:
        raise ArgumentError("both series must be non-empty")

    sim_sorted = sorted(sim)
    sim_t = np.array([p[0] for p in sim_sorted], dtype=float)
    sim_v = np.array([p[1] for p in sim_sorted], dtype=float)
    if tolerance is None:
        tolerance = float(np.median(np.diff(sim_t))) / 2 if len(sim_t) > 1 else math.inf

    pairs: list[ValidationPair] = []
    for t, y in exp:
        i = int(np.searchsorted(sim_t, t))
        candidates = [j for j in (i - 1, i) if 0 <= j < len(sim_t)]
        j = min(candidates, key=lambda c: abs(sim_t[c] - t))
        if abs(sim_t[j] - t) > tolerance:
            continue
        x = float(sim_v[j])
        if x == 0:
            raise ZeroSimulatedValueError(f"simulated value is zero at t={sim_t[j]}")
        pairs.append(ValidationPair(t=float(t), sim=x, exp=float(y), percent=100.0 * (x - y) / x))

    if not pairs:
        raise ArgumentError("no experimental point lies within tolerance of a simulated one")

    rms = math.sqrt(sum(p.percent**2 for p in pairs) / len(pairs))
    return ValidationReport(rms_percent=rms, n=len(pairs), pairs=tuple(pairs))


# -----------------------------
# Исследование шага
# -----------------------------


def step_size_study(
    design: CollectorDesign,
    datasheet: Optional[DatasheetSpec],
    weather: WeatherSeries,
    steps: Sequence[float],
    opts: Optional[SimulationOptions] = None,
    *,
    workers: int = 1,
) -> dict[float, list[SimulationRecord]]:
    """Один прогон на каждый шаг, погода та же (пересэмплированная)."""
    base = opts or SimulationOptions()
    for step in steps:
        ratio = weather.span / step if step > 0 else math.nan
        if not (step > 0 and math.isclose(ratio, round(ratio), abs_tol=1e-9)):
            raise ArgumentError(f"step {step} does not divide the weather span {weather.span}")

    def one(step: float) -> list[SimulationRecord]:
        return run_simulation(design, datasheet, resample_weather(weather, step), replace(base, step=step))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(one, steps))
    return dict(zip(steps, results))


# -----------------------------
# Отчёты
# -----------------------------


def hourly_table(records: Sequence[SimulationRecord]) -> list[SimulationRecord]:
    """Записи ровно на начало часа (t кратно 3600 с)."""
    return [r for r in records if math.isclose(r.t % 3600.0, 0.0, abs_tol=1e-6)]


def summarize(
    records: Sequence[SimulationRecord],
    design: CollectorDesign,
    weather: WeatherSeries,
    opts: SimulationOptions,
) -> dict[str, Any]:
    """
    Сводка прогона. Неопределённые величины (нет солнца и т.п.) равны None.
    """
    try:
        eta_th: Optional[float] = thermal_efficiency(records, design, weather)
    except (UndefinedEfficiencyError, ArgumentError):
        eta_th = None

    sunlit = [r for r in records if r.eta_e is not None]
    eta_e = sunlit[-1].eta_e if sunlit else None
    eta_e_mean = None
    if sunlit:
        eta_e_mean = sum(r.P_mp or 0.0 for r in sunlit) / sum(design.A_c * r.G for r in sunlit)

    eta_o = None
    if eta_th is not None and eta_e is not None and 0 <= eta_th <= 1 and 0 <= eta_e <= 1:
        eta_o = overall_efficiency(eta_th, eta_e)

    return {
        "eta_th": eta_th,
        "eta_e": eta_e,
        "eta_e_mean": eta_e_mean,
        "eta_o": eta_o,
        "T_w_initial": records[0].T_w if records else None,
        "T_w_final": records[-1].T_w if records else None,
        "T_c_max": max((r.T_c for r in records), default=None),
        "records": len(records),
        "flags": opts.flags(),
    }


def records_to_frame(records: Sequence[SimulationRecord]) -> pd.DataFrame:
    columns = list(THERMAL_COLUMNS)
    if any(r.P_mp is not None for r in records):
        columns += list(ELECTRICAL_COLUMNS)
    return pd.DataFrame([asdict(r) for r in records], columns=columns)


def _plain_number(value: float) -> str:
    return f"{value:.6f}".rstrip("0").rstrip(".")


def frame_to_csv(df: pd.DataFrame, stream: IO[str], precision: int = 6) -> None:
    """
    CSV с precision значащими цифрами.

    Колонки времени (t, step) пишутся без экспоненты и не округляются до precision.
    """
    out = df.copy()
    for column in TIME_COLUMNS:
        if column in out.columns:
            out[column] = out[column].map(_plain_number)
    out.to_csv(stream, index=False, float_format=f"%.{precision}g", lineterminator="\n")


def write_results_csv(records: Sequence[SimulationRecord], stream: IO[str], precision: int = 6) -> None:
    frame_to_csv(records_to_frame(records), stream, precision)
