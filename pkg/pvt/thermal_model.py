"""
Тепловая модель PV/T-коллектора.

Что здесь есть
--------------
- коэффициенты теплопередачи (верх, низ, края, Tedlar) и факторы коллектора
  F', F'', F_R, штрафные множители h_p1/h_p2, (ατ)_eff и темп релаксации бака m;
- шаг бака по точному решению dT_w/dt + m·T_w = f (f и m постоянны на шаге);
- цепочка T_w -> T_bs -> T_c и полезная мощность Q_u.

Все функции чистые: никакого состояния, можно звать из разных потоков.
Температуры на входе/выходе в °C, кельвины только внутри радиационных формул.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

from pvt.errors import (
    ArgumentError,
    DegenerateReferenceError,
    InternalConsistencyError,
    UndefinedEfficiencyError,
)
from pvt.model_params import KELVIN_OFFSET, PHYSICS, CollectorDesign, to_kelvin

logger = logging.getLogger("pvt.thermal")


@dataclass(frozen=True)
class DerivedCoefficients:
    """
    Все производные коэффициенты на одном шаге.

    eta_c - КПД элемента, с которым посчитаны (ατ)_eff и T_c (константа из
    конструкции или КПД с предыдущего шага в связанном режиме).
    """

    U_t: float
    U_T: float
    U_b: float
    U_e: float
    U_tT: float
    U_tw: float
    U_L: float
    h_p1: float
    h_p2: float
    alpha_tau_eff: float
    F_prime: float
    F_dblprime: float
    F_R: float
    m_decay: float  # 1/s
    eta_c: float


@dataclass(frozen=True)
class ThermalState:
    T_w: float
    T_bs: float
    T_c: float
    Q_u: float
    eta_i: Optional[float]


# -----------------------------
# Отдельные коэффициенты
# -----------------------------


def conduction_coefficient(thickness: float, conductivity: float) -> float:
    """Теплопроводность слоя K/L, W/m²·K."""
    if thickness <= 0 or conductivity <= 0:
        raise ArgumentError(f"thickness and conductivity must be > 0, got {thickness}, {conductivity}")
    return conductivity / thickness


def back_loss_coefficient(design: CollectorDesign) -> float:
    return 1.0 / (design.L_i / design.K_i + 1.0 / design.h_i)


def wind_coefficient(v: float) -> float:
    """Конвекция с верхней поверхности, h_0 = 5.7 + 3.8·v."""
    return 5.7 + 3.8 * v


def sky_temperature(T_a: float) -> float:
    """
    Эффективная температура неба, K.

    Обе части формулы берут температуру воздуха в кельвинах.
    """
    if T_a <= -KELVIN_OFFSET:
        raise ArgumentError(f"T_a must be above absolute zero, got {T_a}")
    t_k = to_kelvin(T_a)
    return 0.0375636 * t_k**1.5 + 0.32 * t_k


def sky_radiative_coefficient(T_c: float, T_sky: float, emissivity: float) -> float:
    """Линеаризация σε(T_c²+T_sky²)(T_c+T_sky), отнесённая к разности T_c - T_sky."""
    t_c = to_kelvin(T_c)
    return PHYSICS.sigma * emissivity * (t_c**2 + T_sky**2) * (t_c + T_sky)


def radiative_coefficient(T_c: float, T_sky: float, T_a: float, emissivity: float) -> float:
    """
    Радиационный коэффициент элемент -> небо, отнесённый к разности T_c - T_a.

    T_sky в кельвинах, T_c и T_a в °C. При T_c <= T_a отнесение к воздуху
    теряет смысл: DegenerateReferenceError, вызывающий берёт
    sky_radiative_coefficient.
    """
    if T_c <= T_a:
        raise DegenerateReferenceError(f"T_c={T_c} <= T_a={T_a}")
    t_c, t_a = to_kelvin(T_c), to_kelvin(T_a)
    return sky_radiative_coefficient(T_c, T_sky, emissivity) * (t_c - T_sky) / (t_c - t_a)


def top_loss_coefficient(
    design: CollectorDesign,
    T_c: float,
    T_a: float,
    *,
    radiative: bool = True,
) -> float:
    """
    U_t: стекло последовательно с (ветер + излучение) параллельно.

    Без радиационной поправки возвращается табличный design.U_t_fixed, а если
    его нет - стекло последовательно с одной конвекцией.
    """
    u_glass = conduction_coefficient(design.L_g, design.K_g)
    h_surface = wind_coefficient(design.v)

    if not radiative:
        if design.U_t_fixed is not None:
            return design.U_t_fixed
        return 1.0 / (1.0 / u_glass + 1.0 / h_surface)

    t_sky = sky_temperature(T_a)
    try:
        h_rad = radiative_coefficient(T_c, t_sky, T_a, design.emissivity)
    except DegenerateReferenceError:
        logger.debug("h_rad fallback to sky reference T_c=%.3f T_a=%.3f", T_c, T_a)
        h_rad = sky_radiative_coefficient(T_c, t_sky, design.emissivity)
    return 1.0 / (1.0 / u_glass + 1.0 / (h_surface + h_rad))


def edge_loss_coefficient(design: CollectorDesign) -> float:
    return design.UA_edge / design.A_c


def alpha_tau_effective(design: CollectorDesign, eta_c: float) -> float:
    return design.tau_g * (
        design.alpha_c * design.beta_c + design.alpha_T * (1.0 - design.beta_c) - eta_c * design.beta_c
    )


def fin_efficiency(design: CollectorDesign, U_L: float) -> float:
    """КПД ребра tanh(x)/x, x = μ(W-D)/2, μ = sqrt(U_L / (k·δ))."""
    mu = math.sqrt(U_L / (design.k_plate * design.delta_plate))
    x = mu * (design.W - design.D) / 2.0
    if x == 0:
        return 1.0
    return math.tanh(x) / x


def collector_efficiency_factor(design: CollectorDesign, U_L: float) -> float:
    """F' для трубки с рёбрами (форма Хоттеля-Уиллера, без сопротивления пайки)."""
    F = fin_efficiency(design, U_L)
    fin = 1.0 / (U_L * (design.D + (design.W - design.D) * F))
    tube = 1.0 / (math.pi * design.D * design.h_T)
    return (1.0 / U_L) / (design.W * (fin + tube))


def collector_flow_factor(design: CollectorDesign, U_L: float, F_prime: float) -> float:
    capacity = design.m_dot * design.C_w
    x = design.A_c * U_L * F_prime / capacity
    return -math.expm1(-x) / x


# -----------------------------
# Сборка всех коэффициентов
# -----------------------------


def _check_coefficients(c: DerivedCoefficients) -> None:
    problems: list[str] = []

    for name in ("U_t", "U_T", "U_b", "U_tT", "U_tw", "U_L", "alpha_tau_eff", "m_decay"):
        if not getattr(c, name) > 0:
            problems.append(f"{name}={getattr(c, name)} must be > 0")
    if c.U_e < 0:
        problems.append(f"U_e={c.U_e} must be >= 0")
    if not 0 < c.h_p1 < 1:
        problems.append(f"h_p1={c.h_p1} not in (0, 1)")
    if not 0 < c.h_p2 < 1:
        problems.append(f"h_p2={c.h_p2} not in (0, 1)")
    if not 0 < c.F_prime <= 1:
        problems.append(f"F_prime={c.F_prime} not in (0, 1]")
    if not 0 < c.F_dblprime <= 1:
        problems.append(f"F_dblprime={c.F_dblprime} not in (0, 1]")
    if not c.F_R <= c.F_prime:
        problems.append(f"F_R={c.F_R} > F_prime={c.F_prime}")
    if not c.U_tT < min(c.U_t, c.U_T):
        problems.append("U_tT must be < min(U_t, U_T)")

    if problems:
        raise InternalConsistencyError("derived coefficients inconsistent: " + "; ".join(problems))


def derive_coefficients(
    design: CollectorDesign,
    T_c_guess: float,
    T_a: float,
    *,
    eta_c: Optional[float] = None,
    radiative: bool = True,
    edge_loss: bool = True,
) -> DerivedCoefficients:
    """
    Считает все коэффициенты для одного шага.

    T_c_guess нужен только для радиационной поправки (берётся T_c с прошлого
    шага, без внутренних итераций). edge_loss=False обнуляет U_e - так
    воспроизводится "старая" модель.
    """
    eta = design.eta_c_ref if eta_c is None else eta_c

    U_t = top_loss_coefficient(design, T_c_guess, T_a, radiative=radiative)
    U_T = conduction_coefficient(design.L_T, design.K_T)
    U_b = back_loss_coefficient(design)
    U_e = edge_loss_coefficient(design) if edge_loss else 0.0

    U_tT = U_t * U_T / (U_t + U_T)
    U_tw = design.h_T * U_tT / (design.h_T + U_tT)
    U_L = U_tw + U_b + U_e

    h_p1 = U_T / (U_t + U_T)
    h_p2 = design.h_T / (design.h_T + U_tT)

    F_prime = collector_efficiency_factor(design, U_L)
    F_dblprime = collector_flow_factor(design, U_L, F_prime)
    F_R = F_prime * F_dblprime

    m_decay = (design.UA_tank + design.A_c * F_R * U_L) / (design.M_w * design.C_w)

    coeffs = DerivedCoefficients(
        U_t=U_t,
        U_T=U_T,
        U_b=U_b,
        U_e=U_e,
        U_tT=U_tT,
        U_tw=U_tw,
        U_L=U_L,
        h_p1=h_p1,
        h_p2=h_p2,
        alpha_tau_eff=alpha_tau_effective(design, eta),
        F_prime=F_prime,
        F_dblprime=F_dblprime,
        F_R=F_R,
        m_decay=m_decay,
        eta_c=eta,
    )
    _check_coefficients(coeffs)
    return coeffs


# -----------------------------
# Бак и температурная цепочка
# -----------------------------


def tank_forcing(coeffs: DerivedCoefficients, design: CollectorDesign, G_avg: float, T_a_avg: float) -> float:
    """Правая часть f(t) уравнения бака, °C/s (G и T_a усреднены по шагу)."""
    gain = design.A_c * coeffs.F_R * coeffs.h_p1 * coeffs.h_p2 * coeffs.alpha_tau_eff * G_avg
    loss_conductance = design.UA_tank + design.A_c * coeffs.F_R * coeffs.U_L
    return (gain + T_a_avg * loss_conductance) / (design.M_w * design.C_w)


def step_tank(T_w_prev: float, f_bar: float, m_decay: float, dt: float) -> float:
    """
    T_w через dt при постоянных f и m.

    Решение точное, поэтому n шагов по dt дают то же, что один шаг n·dt.
    """
    if dt <= 0 or m_decay <= 0:
        raise ArgumentError(f"dt and m_decay must be > 0, got {dt}, {m_decay}")
    decay = math.exp(-m_decay * dt)
    return (f_bar / m_decay) * (-math.expm1(-m_decay * dt)) + T_w_prev * decay


def back_surface_temperature(
    coeffs: DerivedCoefficients, design: CollectorDesign, G: float, T_a: float, T_w: float
) -> float:
    absorbed = coeffs.h_p1 * coeffs.alpha_tau_eff * G
    return (absorbed + coeffs.U_tT * T_a + design.h_T * T_w) / (coeffs.U_tT + design.h_T)


def cell_temperature(
    coeffs: DerivedCoefficients, design: CollectorDesign, G: float, T_a: float, T_bs: float
) -> float:
    """
    T_c из баланса элемента: поглощённое минус электричество уходит вверх (U_t)
    и вниз через Tedlar (U_T).
    """
    absorbed = design.tau_g * (design.alpha_c * G * design.beta_c + (1.0 - design.beta_c) * design.alpha_T * G)
    electrical = coeffs.eta_c * design.tau_g * G * design.beta_c
    return (absorbed - electrical + coeffs.U_t * T_a + coeffs.U_T * T_bs) / (coeffs.U_t + coeffs.U_T)


def useful_energy(coeffs: DerivedCoefficients, design: CollectorDesign, G: float, T_a: float, T_in: float) -> float:
    """Q_u, W. Ночью бывает отрицательной - здесь не обрезаем."""
    return design.A_c * coeffs.F_R * (
        coeffs.h_p1 * coeffs.h_p2 * coeffs.alpha_tau_eff * G - coeffs.U_L * (T_in - T_a)
    )


def instantaneous_efficiency(Q_u: float, A_c: float, G: float) -> float:
    if G <= 0:
        raise UndefinedEfficiencyError("instantaneous efficiency undefined for G <= 0")
    return Q_u / (A_c * G)


def thermal_state(
    coeffs: DerivedCoefficients,
    design: CollectorDesign,
    G: float,
    T_a: float,
    T_w: float,
    *,
    clamp_negative_qu: bool = False,
) -> ThermalState:
    """Цепочка T_w -> T_bs -> T_c, Q_u и η_i в один момент времени."""
    T_bs = back_surface_temperature(coeffs, design, G, T_a, T_w)
    T_c = cell_temperature(coeffs, design, G, T_a, T_bs)
    Q_u = useful_energy(coeffs, design, G, T_a, T_w)
    if clamp_negative_qu and Q_u < 0:
        Q_u = 0.0
    eta_i = instantaneous_efficiency(Q_u, design.A_c, G) if G > 0 else None
    return ThermalState(T_w=T_w, T_bs=T_bs, T_c=T_c, Q_u=Q_u, eta_i=eta_i)
