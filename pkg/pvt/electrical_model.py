"""
Электрическая модель PV-модуля (однодиодная схема).

Три варианта схемы:
- ideal        - источник тока + диод;
- series       - плюс последовательное сопротивление R_s;
- series_shunt - плюс шунт R_sh (основной вариант).

Параметры при STC извлекаются из паспорта (a_ref -> I_RS_ref -> R_s), затем
пересчитываются на рабочие G и T_c. Неявное уравнение I(V) решается
демпфированным Ньютоном; если он не сошёлся - brentq на вилке.

Модель решается на уровне модуля целиком (a_ref ~ 1.4 В включает 36 элементов).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import optimize

from pvt.errors import (
    ArgumentError,
    DegenerateDatasheetError,
    InconsistentDatasheetError,
    SolverError,
    UndefinedEfficiencyError,
)
from pvt.model_params import KELVIN_OFFSET, PHYSICS, DatasheetSpec, to_kelvin

logger = logging.getLogger("pvt.electrical")

Variant = Literal["ideal", "series", "series_shunt"]
VARIANTS: tuple[str, ...] = ("ideal", "series", "series_shunt")

RESIDUAL_TOL = 1e-9  # A
NEWTON_MAX_ITER = 100
NEWTON_MAX_HALVINGS = 8
MPP_VOLTAGE_TOL = 1e-4  # V

GOLDEN = (1 + math.sqrt(5)) / 2


@dataclass(frozen=True)
class ReferenceParams:
    a_ref: float  # V
    I_RS_ref: float  # A
    R_s: float  # Ω
    R_sh: float  # Ω

    def __post_init__(self) -> None:
        if not (self.a_ref > 0 and self.I_RS_ref > 0 and self.R_s >= 0 and self.R_sh > 0):
            raise ArgumentError(f"invalid reference parameters: {self}")


@dataclass(frozen=True)
class DiodeModel:
    """
    Пять параметров однодиодной модели при заданных G и T_c.

    Для ideal R_s считается нулём, R_sh бесконечным; для series - только R_sh
    бесконечным. Поля хранят исходные значения, эффективные - в свойствах.
    """

    I_ph: float
    I_s: float
    a: float
    R_s: float = 0.0
    R_sh: float = math.inf
    variant: Variant = "series_shunt"

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ArgumentError(f"unknown circuit variant {self.variant!r}")
        if not (self.I_ph >= 0 and self.I_s > 0 and self.a > 0):
            raise ArgumentError(f"need I_ph >= 0, I_s > 0, a > 0; got {self}")
        if self.R_s < 0 or not self.R_sh > 0:
            raise ArgumentError(f"need R_s >= 0 and R_sh > 0; got {self}")

    @property
    def series_resistance(self) -> float:
        return 0.0 if self.variant == "ideal" else self.R_s

    @property
    def shunt_conductance(self) -> float:
        return 1.0 / self.R_sh if self.variant == "series_shunt" else 0.0


@dataclass(frozen=True)
class OperatingPoint:
    V: float
    I: float  # noqa: E741
    P: float

    @classmethod
    def at(cls, V: float, I: float) -> "OperatingPoint":  # noqa: E741
        return cls(V=V, I=I, P=V * I)


# -----------------------------
# Извлечение параметров из паспорта
# -----------------------------


def ideality_factor(ds: DatasheetSpec) -> float:
    """Модифицированный коэффициент идеальности a_ref, В."""
    ratio = ds.I_mp_ref / ds.I_sc_ref
    if ratio >= 1:
        raise DegenerateDatasheetError("I_mp_ref must be < I_sc_ref")
    denominator = ds.I_mp_ref / (ds.I_sc_ref - ds.I_mp_ref) + math.log1p(-ratio)
    if abs(denominator) < 1e-12:
        raise DegenerateDatasheetError("ideality factor denominator vanishes")
    a = (2.0 * ds.V_mp_ref - ds.V_oc_ref) / denominator
    if not (math.isfinite(a) and a > 0):
        raise DegenerateDatasheetError(f"ideality factor must be positive, got {a}")
    return a


def reverse_saturation_current(ds: DatasheetSpec, a_ref: float) -> float:
    if a_ref <= 0:
        raise ArgumentError(f"a_ref must be > 0, got {a_ref}")
    return ds.I_sc_ref * math.exp(-ds.V_oc_ref / a_ref)


def series_resistance(ds: DatasheetSpec, a_ref: float) -> float:
    """
    R_s из паспорта. Маленький отрицательный результат (округления) обрезаем
    до нуля, заметно отрицательный означает противоречивый паспорт.
    """
    if a_ref <= 0:
        raise ArgumentError(f"a_ref must be > 0, got {a_ref}")
    value = (a_ref * math.log1p(-ds.I_mp_ref / ds.I_sc_ref) - ds.V_mp_ref + ds.V_oc_ref) / ds.I_mp_ref
    if value < -1e-3:
        raise InconsistentDatasheetError(f"series resistance comes out negative: {value:.6g} ohm")
    return max(value, 0.0)


def extract_reference_params(ds: DatasheetSpec) -> ReferenceParams:
    a_ref = ideality_factor(ds)
    i_rs = reverse_saturation_current(ds, a_ref)
    r_s = series_resistance(ds, a_ref)
    if ds.R_s_override is not None:
        r_s = ds.R_s_override
    return ReferenceParams(a_ref=a_ref, I_RS_ref=i_rs, R_s=r_s, R_sh=ds.R_sh_fixed)


# -----------------------------
# Пересчёт на рабочие условия
# -----------------------------


def photocurrent(ds: DatasheetSpec, G: float, T_c: float) -> float:
    if G < 0:
        raise ArgumentError(f"G must be >= 0, got {G}")
    return (ds.I_sc_ref + ds.K_I * (T_c - ds.T_ref)) * (G / ds.G_ref)


def saturation_current(ref: ReferenceParams, ds: DatasheetSpec, T_c: float) -> float:
    """
    I_s(T) = I_RS_ref · (T/T_ref)³ · exp[q·E_g/(n·k) · (1/T_ref - 1/T)].

    n·k берётся из a_ref = N_s·n·k·T_ref/q.
    """
    if T_c <= -KELVIN_OFFSET:
        raise ArgumentError(f"T_c must be above absolute zero, got {T_c}")
    t_k, t_ref = to_kelvin(T_c), to_kelvin(ds.T_ref)
    n_k = ref.a_ref * PHYSICS.q_e / (ds.cells_in_series * t_ref)
    exponent = PHYSICS.q_e * PHYSICS.E_g / n_k * (1.0 / t_ref - 1.0 / t_k)
    return ref.I_RS_ref * (t_k / t_ref) ** 3 * math.exp(exponent)


def modified_ideality(ref: ReferenceParams, ds: DatasheetSpec, T_c: float) -> float:
    return ref.a_ref * to_kelvin(T_c) / to_kelvin(ds.T_ref)


def build_diode_model(
    ds: DatasheetSpec,
    ref: ReferenceParams,
    G: float,
    T_c: float,
    variant: Variant = "series_shunt",
) -> DiodeModel:
    return DiodeModel(
        I_ph=max(photocurrent(ds, G, T_c), 0.0),
        I_s=saturation_current(ref, ds, T_c),
        a=modified_ideality(ref, ds, T_c),
        R_s=ref.R_s,
        R_sh=ref.R_sh,
        variant=variant,
    )


# -----------------------------
# Решение I(V)
# -----------------------------


def _residual(model: DiodeModel, V: float, I: float) -> tuple[float, float]:  # noqa: E741
    """g(I) = I - rhs(I) и dg/dI. g строго возрастает по I."""
    r_s = model.series_resistance
    g_sh = model.shunt_conductance
    vd = V + I * r_s
    try:
        e = math.exp(vd / model.a)
    except OverflowError:
        e = math.inf
    g = I - model.I_ph + model.I_s * (e - 1.0) + vd * g_sh
    dg = 1.0 + model.I_s * e * r_s / model.a + r_s * g_sh
    return g, dg


def _newton(model: DiodeModel, V: float) -> float | None:
    current = model.I_ph
    g, dg = _residual(model, V, current)
    for _ in range(NEWTON_MAX_ITER):
        if abs(g) < 1e-12:
            return current
        step = g / dg
        lam = 1.0
        for _ in range(NEWTON_MAX_HALVINGS + 1):
            trial = current - lam * step
            g_trial, dg_trial = _residual(model, V, trial)
            if abs(g_trial) < abs(g):
                break
            lam /= 2.0
        else:
            # не смогли уменьшить невязку: либо уже на уровне округлений, либо застряли
            return current if abs(g) < RESIDUAL_TOL else None
        current, g, dg = trial, g_trial, dg_trial
    return current if abs(g) < RESIDUAL_TOL else None


def _bracketed(model: DiodeModel, V: float) -> float:
    base = max(model.I_ph, 1e-6)
    lo, hi = -base, 2.0 * base

    def g(x: float) -> float:
        return _residual(model, V, x)[0]

    for _ in range(60):
        if g(lo) <= 0:
            break
        lo *= 2.0
    else:
        raise SolverError(f"no bracket found below the root at V={V}")
    for _ in range(60):
        if g(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise SolverError(f"no bracket found above the root at V={V}")

    return optimize.brentq(g, lo, hi, xtol=1e-15, maxiter=200)


def solve_current(model: DiodeModel, V: float) -> float:
    """
    Ток модуля при напряжении V.

    Гарантия: |g(I)| < 1e-9 A, иначе SolverError.
    """
    if model.variant == "ideal":
        return model.I_ph - model.I_s * math.expm1(V / model.a)

    current = _newton(model, V)
    if current is None:
        logger.debug("newton failed, falling back to brentq V=%.6g model=%s", V, model)
        current = _bracketed(model, V)

    residual = _residual(model, V, current)[0]
    if not abs(residual) < RESIDUAL_TOL:
        raise SolverError(f"residual {residual:.3g} A at V={V} exceeds tolerance")
    return current


def open_circuit_voltage(model: DiodeModel) -> float:
    """
    V_oc модели: корень I(V) = 0 на [0, V_ideal].

    V_ideal = a·ln(1 + I_ph/I_s) - напряжение холостого хода без сопротивлений;
    с R_s/R_sh ток там уже неположительный.
    """
    if model.I_ph <= 0:
        return 0.0
    v_hi = model.a * math.log1p(model.I_ph / model.I_s)
    if solve_current(model, v_hi) >= 0:
        return v_hi
    return optimize.brentq(lambda v: solve_current(model, v), 0.0, v_hi, xtol=1e-12)


def iv_curve(model: DiodeModel, n_points: int) -> list[OperatingPoint]:
    """Точки I-V (и P) с равным шагом по напряжению от 0 до V_oc."""
    if n_points < 2:
        raise ArgumentError(f"n_points must be >= 2, got {n_points}")
    if model.I_ph <= 0:
        raise ArgumentError("I-V curve needs a positive photocurrent")
    v_oc = open_circuit_voltage(model)
    return [OperatingPoint.at(float(v), solve_current(model, float(v))) for v in np.linspace(0.0, v_oc, n_points)]


def _golden_section_maximize(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    c = b - (b - a) / GOLDEN
    d = a + (b - a) / GOLDEN
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + (b - a) / GOLDEN
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - (b - a) / GOLDEN
            fc = f(c)
    return (a + b) / 2


def max_power_point(model: DiodeModel) -> OperatingPoint:
    """Точка максимальной мощности (P(V) унимодальна на [0, V_oc])."""
    if model.I_ph <= 0:
        return OperatingPoint(V=0.0, I=0.0, P=0.0)
    v_oc = open_circuit_voltage(model)
    v_mp = _golden_section_maximize(lambda v: v * solve_current(model, v), 0.0, v_oc, MPP_VOLTAGE_TOL)
    return OperatingPoint.at(v_mp, solve_current(model, v_mp))


def electrical_efficiency(mpp: OperatingPoint, A_c: float, G: float) -> float:
    if G <= 0:
        raise UndefinedEfficiencyError("electrical efficiency undefined for G <= 0")
    if A_c <= 0:
        raise ArgumentError(f"A_c must be > 0, got {A_c}")
    return mpp.V * mpp.I / (A_c * G)


# -----------------------------
# Семейства кривых
# -----------------------------


@dataclass(frozen=True)
class CurvePoint:
    T_c: float
    G: float
    point: OperatingPoint


def curve_family(
    ds: DatasheetSpec,
    ref: ReferenceParams,
    temps: Sequence[float],
    irradiances: Sequence[float],
    n_points: int,
    *,
    variant: Variant = "series_shunt",
    workers: int = 1,
) -> list[CurvePoint]:
    """Кривые для всех сочетаний temps × irradiances в длинном формате."""
    pairs = [(t, g) for t in temps for g in irradiances]
    return paired_curves(ds, ref, pairs, n_points, variant=variant, workers=workers)


def paired_curves(
    ds: DatasheetSpec,
    ref: ReferenceParams,
    pairs: Sequence[tuple[float, float]],
    n_points: int,
    *,
    variant: Variant = "series_shunt",
    workers: int = 1,
) -> list[CurvePoint]:
    """
    По одной кривой на каждую пару (T_c, G), например на каждый час прогона.

    Пары независимы и считаются параллельно; порядок - как во входном списке.
    """

    def one(pair: tuple[float, float]) -> list[CurvePoint]:
        t_c, g = pair
        try:
            model = build_diode_model(ds, ref, g, t_c, variant)
            return [CurvePoint(T_c=t_c, G=g, point=p) for p in iv_curve(model, n_points)]
        except (SolverError, ArgumentError) as e:
            raise SolverError(f"T_c={t_c} G={g}: {e}") from e

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        chunks = list(pool.map(one, pairs))
    return [p for chunk in chunks for p in chunk]
