"""
Входные записи симулятора: конструкция коллектора, паспорт PV-модуля, погода.

Зачем нужен модуль
------------------
- собрать все входные данные в неизменяемые dataclass'ы;
- проверить инварианты при создании (а не где-то в глубине расчёта);
- загрузить их из файлов: JSON для конструкции/паспорта, CSV для погоды и
  оцифрованных экспериментальных кривых.

Единицы
-------
Всё в СИ, температуры на интерфейсах в °C. В кельвины переводим только внутри
радиационных формул (thermal_model) и температурной зависимости диода.

Формат JSON
-----------
Плоский объект, ключи совпадают с именами полей dataclass'а. Поля с дефолтом
можно не указывать; неизвестные ключи считаем опечаткой и отклоняем.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import MISSING, asdict, dataclass, field, fields
from typing import IO, Any, Optional, Union

import numpy as np
import pandas as pd
from scipy import constants

from pvt.errors import (
    ArgumentError,
    ConfigValidationError,
    MissingFieldError,
    SeriesSizeError,
    WeatherOrderError,
    require,
)

Source = Union[IO[bytes], bytes]

KELVIN_OFFSET = constants.zero_Celsius  # 273.15


@dataclass(frozen=True)
class PhysicalConstants:
    """Физические константы (CODATA через scipy.constants)."""

    sigma: float = constants.Stefan_Boltzmann  # W/m²·K⁴
    k_B: float = constants.k  # J/K
    q_e: float = constants.e  # C
    # кристаллический кремний
    E_g: float = 1.12  # eV


PHYSICS = PhysicalConstants()


def to_kelvin(t_c: float) -> float:
    return t_c + KELVIN_OFFSET


# -----------------------------
# Конструкция коллектора и бака
# -----------------------------

_POSITIVE_DESIGN_FIELDS = (
    "A_c", "b", "L", "W", "D", "m_dot", "M_w", "C_w", "UA_tank",
    "L_g", "K_g", "L_c", "K_c", "L_T", "K_T", "L_i", "K_i",
    "h_i", "h_T", "k_plate", "delta_plate",
)

_UNIT_FRACTION_FIELDS = ("tau_g", "alpha_c", "alpha_T", "beta_c")


@dataclass(frozen=True)
class CollectorDesign:
    """
    Геометрия, оптика и материалы PV/T-панели и накопительного бака.

    UA_edge не приводится в исходных данных, поэтому задаётся напрямую (W/K),
    0 отключает краевые потери. U_t_fixed - табличный U_t, который используется
    при выключенной радиационной поправке; None означает "посчитать U_t из
    стекла и ветра".
    """

    A_c: float  # m²
    b: float  # m
    L: float  # m
    W: float  # m, шаг трубок
    D: float  # m, диаметр трубки
    m_dot: float  # kg/s
    M_w: float  # kg
    C_w: float  # J/kg·K
    UA_tank: float  # W/K
    L_g: float
    K_g: float
    L_c: float
    K_c: float
    L_T: float
    K_T: float
    L_i: float
    K_i: float
    h_i: float  # W/m²·K, задняя поверхность
    h_T: float  # W/m²·K, Tedlar -> вода
    v: float  # m/s
    tau_g: float
    alpha_T: float
    beta_c: float
    eta_c_ref: float
    T_w0: float  # °C
    UA_edge: float = 0.12
    alpha_c: float = 0.85
    emissivity: float = 0.88
    k_plate: float = 385.0  # медный поглотитель
    delta_plate: float = 0.0006
    U_t_fixed: Optional[float] = 9.24

    def __post_init__(self) -> None:
        for name in _POSITIVE_DESIGN_FIELDS:
            value = getattr(self, name)
            require(math.isfinite(value) and value > 0, f"{name} must be > 0, got {value}", name)

        for name in ("UA_edge", "v"):
            value = getattr(self, name)
            require(math.isfinite(value) and value >= 0, f"{name} must be >= 0, got {value}", name)

        for name in _UNIT_FRACTION_FIELDS:
            value = getattr(self, name)
            require(0 < value <= 1, f"{name} must be in (0, 1], got {value}", name)

        require(0 <= self.eta_c_ref < 1, f"eta_c_ref must be in [0, 1), got {self.eta_c_ref}", "eta_c_ref")
        require(0 <= self.emissivity <= 1, f"emissivity must be in [0, 1], got {self.emissivity}", "emissivity")
        require(self.D < self.W, f"D must be < W, got D={self.D} W={self.W}", "D")
        require(math.isfinite(self.T_w0) and self.T_w0 > -KELVIN_OFFSET, "T_w0 must be above absolute zero", "T_w0")
        if self.U_t_fixed is not None:
            require(self.U_t_fixed > 0, f"U_t_fixed must be > 0 or null, got {self.U_t_fixed}", "U_t_fixed")


# -----------------------------
# Паспорт PV-модуля
# -----------------------------


@dataclass(frozen=True)
class DatasheetSpec:
    """
    Паспортные данные модуля при STC (уровень модуля, не отдельного элемента).

    K_I хранится в A/°C. K_V информационный: уравнения модели его не используют.
    """

    I_sc_ref: float  # A
    V_oc_ref: float  # V
    I_mp_ref: float  # A
    V_mp_ref: float  # V
    K_I: float  # A/°C
    K_V: float  # V/°C
    NOCT: float  # °C
    T_ref: float = 25.0  # °C
    G_ref: float = 1000.0  # W/m²
    R_sh_fixed: float = 300.0  # Ω
    cells_in_series: int = 36
    R_s_override: Optional[float] = None  # Ω

    def __post_init__(self) -> None:
        require(0 < self.I_mp_ref < self.I_sc_ref, "need 0 < I_mp_ref < I_sc_ref", "I_mp_ref")
        require(0 < self.V_mp_ref < self.V_oc_ref, "need 0 < V_mp_ref < V_oc_ref", "V_mp_ref")
        require(self.G_ref > 0, f"G_ref must be > 0, got {self.G_ref}", "G_ref")
        require(self.R_sh_fixed > 0, f"R_sh_fixed must be > 0, got {self.R_sh_fixed}", "R_sh_fixed")
        require(self.T_ref > -KELVIN_OFFSET, "T_ref must be above absolute zero", "T_ref")
        require(
            isinstance(self.cells_in_series, int) and self.cells_in_series >= 1,
            f"cells_in_series must be a positive integer, got {self.cells_in_series}",
            "cells_in_series",
        )
        if self.R_s_override is not None:
            require(self.R_s_override >= 0, "R_s_override must be >= 0 or null", "R_s_override")


# -----------------------------
# JSON-загрузчики
# -----------------------------


def _read_json_object(source: Source) -> dict[str, Any]:
    raw = source if isinstance(source, (bytes, bytearray)) else source.read()
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigValidationError(f"malformed JSON: {e}") from e
    require(isinstance(doc, dict), "document must be a JSON object")
    return doc


def _as_number(doc: dict[str, Any], name: str, *, nullable: bool = False) -> Optional[float]:
    value = doc[name]
    if value is None and nullable:
        return None
    # bool - подкласс int, но в конфиге это почти всегда ошибка
    require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        f"{name} must be a number, got {value!r}",
        name,
    )
    return float(value)


def _build_record(cls: type, doc: dict[str, Any], nullable: tuple[str, ...] = ()) -> dict[str, Any]:
    """
    Собирает kwargs для dataclass'а: обязательные поля проверяем на наличие,
    поля с дефолтом берём из документа только если они там есть.
    """
    kwargs: dict[str, Any] = {}
    for f in fields(cls):
        if f.name not in doc:
            if f.default is MISSING:
                raise MissingFieldError(f.name)
            continue
        kwargs[f.name] = _as_number(doc, f.name, nullable=f.name in nullable)
    return kwargs


def load_collector_config(source: Source) -> CollectorDesign:
    """Читает CollectorDesign из JSON-документа."""
    doc = _read_json_object(source)
    known = {f.name for f in fields(CollectorDesign)}
    unknown = sorted(set(doc) - known)
    require(not unknown, f"unknown fields: {', '.join(unknown)}", unknown[0] if unknown else None)
    return CollectorDesign(**_build_record(CollectorDesign, doc, nullable=("U_t_fixed",)))


def dump_collector_config(design: CollectorDesign) -> bytes:
    return json.dumps(asdict(design), indent=2).encode("utf-8")


def load_datasheet(source: Source) -> DatasheetSpec:
    """
    Читает DatasheetSpec из JSON-документа.

    Температурный коэффициент тока можно задать как K_I (A/°C) или как
    K_I_percent (%/°C от I_sc, как в паспорте): K_I = K_I_percent/100 · I_sc_ref.
    """
    doc = dict(_read_json_object(source))
    known = {f.name for f in fields(DatasheetSpec)} | {"K_I_percent"}
    unknown = sorted(set(doc) - known)
    require(not unknown, f"unknown fields: {', '.join(unknown)}", unknown[0] if unknown else None)

    if "K_I_percent" in doc:
        require("K_I" not in doc, "give either K_I or K_I_percent, not both", "K_I")
        percent = _as_number(doc, "K_I_percent")
        if "I_sc_ref" not in doc:
            raise MissingFieldError("I_sc_ref")
        doc["K_I"] = percent / 100.0 * _as_number(doc, "I_sc_ref")
        del doc["K_I_percent"]

    kwargs = _build_record(DatasheetSpec, doc, nullable=("R_s_override",))
    if "cells_in_series" in kwargs:
        n = kwargs["cells_in_series"]
        require(float(n).is_integer(), f"cells_in_series must be an integer, got {n}", "cells_in_series")
        kwargs["cells_in_series"] = int(n)
    return DatasheetSpec(**kwargs)


# -----------------------------
# Погода
# -----------------------------


def _readonly(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeatherSeries:
    """
    Упорядоченные отсчёты (t, G, T_a).

    t - секунды от начала, G - W/m², T_a - °C. Массивы read-only.
    """

    t: np.ndarray
    G: np.ndarray
    T_a: np.ndarray
    _step: Optional[float] = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        t, g, ta = _readonly(self.t), _readonly(self.G), _readonly(self.T_a)
        if not (t.ndim == g.ndim == ta.ndim == 1 and len(t) == len(g) == len(ta)):
            raise ConfigValidationError("t, G and T_a must be 1-D arrays of equal length")
        if len(t) < 2:
            raise SeriesSizeError(f"weather series needs at least 2 samples, got {len(t)}")
        for name, arr in (("time", t), ("irradiance", g), ("ambient", ta)):
            require(bool(np.all(np.isfinite(arr))), f"{name} has non-finite values", name)

        bad = np.flatnonzero(np.diff(t) <= 0)
        if bad.size:
            i = int(bad[0]) + 1
            raise WeatherOrderError(
                f"timestamps must be strictly increasing (row {i}: {t[i]} after {t[i - 1]})", field="time"
            )
        neg = np.flatnonzero(g < 0)
        if neg.size:
            i = int(neg[0])
            raise ConfigValidationError(f"irradiance must be >= 0 (row {i}: {g[i]})", field="irradiance")
        require(bool(np.all(ta > -KELVIN_OFFSET)), "ambient below absolute zero", "ambient")

        object.__setattr__(self, "t", t)
        object.__setattr__(self, "G", g)
        object.__setattr__(self, "T_a", ta)

        dt = np.diff(t)
        if np.allclose(dt, dt[0], rtol=0.0, atol=1e-9):
            object.__setattr__(self, "_step", float(dt[0]))

    def __len__(self) -> int:
        return len(self.t)

    @property
    def samples(self) -> list[tuple[float, float, float]]:
        return [(float(a), float(b), float(c)) for a, b, c in zip(self.t, self.G, self.T_a)]

    @property
    def span(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def uniform_step(self) -> Optional[float]:
        """Шаг сетки, если она равномерная, иначе None."""
        return self._step


def parse_time(raw: Any) -> float:
    """
    Время отсчёта: целые/дробные секунды или HH:MM[:SS].
    """
    text = str(raw).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3) or not all(p.strip().isdigit() for p in parts):
            raise ValueError(f"bad clock time {text!r}")
        hh, mm = int(parts[0]), int(parts[1])
        ss = int(parts[2]) if len(parts) == 3 else 0
        if mm >= 60 or ss >= 60:
            raise ValueError(f"bad clock time {text!r}")
        return float(hh * 3600 + mm * 60 + ss)
    return float(text)


def _read_csv(source: Source, time_columns: tuple[str, ...]) -> pd.DataFrame:
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    try:
        return pd.read_csv(
            source,
            dtype={c: str for c in time_columns},
            skipinitialspace=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        raise SeriesSizeError("CSV is empty") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ConfigValidationError(f"malformed CSV: {e}") from e


def _parse_time_column(values: pd.Series, column: str) -> np.ndarray:
    out = np.empty(len(values), dtype=float)
    for i, raw in enumerate(values):
        try:
            out[i] = parse_time(raw)
        except ValueError as e:
            raise ConfigValidationError(f"row {i}: bad {column} value {raw!r}", field=column) from e
    return out


def _numeric_column(df: pd.DataFrame, column: str) -> np.ndarray:
    values = pd.to_numeric(df[column], errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i = int(bad[0])
        raise ConfigValidationError(f"row {i}: bad {column} value {df[column].iloc[i]!r}", field=column)
    return values


WEATHER_COLUMNS = ("time", "irradiance", "ambient")


def load_weather_csv(source: Source) -> WeatherSeries:
    """
    Читает погодный CSV с колонками time, irradiance, ambient.

    time - секунды или HH:MM; дубликаты и неупорядоченные отсчёты отклоняются.
    """
    df = _read_csv(source, ("time",))
    for column in WEATHER_COLUMNS:
        if column not in df.columns:
            raise MissingFieldError(column)
    if len(df) < 2:
        raise SeriesSizeError(f"weather series needs at least 2 samples, got {len(df)}")

    return WeatherSeries(
        t=_parse_time_column(df["time"], "time"),
        G=_numeric_column(df, "irradiance"),
        T_a=_numeric_column(df, "ambient"),
    )


def load_trace_csv(source: Source, column: str) -> list[tuple[float, float]]:
    """
    Читает одну кривую (время, значение) из CSV: результат симуляции или
    оцифрованный эксперимент. Колонка времени называется `t` или `time`.
    """
    df = _read_csv(source, ("t", "time"))
    time_column = "t" if "t" in df.columns else "time"
    if time_column not in df.columns:
        raise MissingFieldError("time")
    if column not in df.columns:
        raise MissingFieldError(column)

    # пустые ячейки (например eta_i ночью) просто пропускаем
    df = df[df[column].notna()]
    times = _parse_time_column(df[time_column], time_column)
    values = _numeric_column(df, column)
    return list(zip(times.tolist(), values.tolist()))


def load_operating_points(source: Source) -> list[tuple[float, float]]:
    """
    Пары (T_c, G) из CSV с колонками T_c и G, например почасовая таблица прогона.

    Тёмные строки (G <= 0) пропускаются: кривой для них нет.
    """
    df = _read_csv(source, ())
    for column in ("T_c", "G"):
        if column not in df.columns:
            raise MissingFieldError(column)
    T_c = _numeric_column(df, "T_c")
    G = _numeric_column(df, "G")
    pairs = [(t, g) for t, g in zip(T_c.tolist(), G.tolist()) if g > 0]
    require(bool(pairs), "no sunlit rows (G > 0) in the operating points file", "G")
    return pairs


def resample_weather(series: WeatherSeries, step: float) -> WeatherSeries:
    """
    Переводит ряд на равномерную сетку с шагом step (линейная интерполяция).

    Сетка начинается с первого отсчёта; последний узел - последний, который
    помещается в исходный интервал (floor(span/step) + 1 узлов).
    """
    if not (step > 0 and math.isfinite(step)):
        raise ArgumentError(f"step must be > 0, got {step}")
    if step > series.span:
        raise ArgumentError(f"step {step} exceeds series span {series.span}")

    n = int(math.floor(series.span / step + 1e-9)) + 1
    grid = series.t[0] + step * np.arange(n, dtype=float)
    return WeatherSeries(
        t=grid,
        G=np.interp(grid, series.t, series.G),
        T_a=np.interp(grid, series.t, series.T_a),
    )
