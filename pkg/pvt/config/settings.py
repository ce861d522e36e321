"""
Загрузка настроек симулятора из переменных окружения.

Модуль нужен, чтобы:
- собрать все env в одном месте;
- дать единые дефолты и валидацию;
- не читать os.environ по всему пакету.

Флаги CLI перекрывают настройки, настройки перекрывают встроенные дефолты.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from pvt.sim_engine import SimulationOptions

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


def get_env(name: str, default: str | None = None, required: bool = False) -> str:
    """
    Читает переменную окружения как строку.

    Если required=True и переменная пустая, выбрасываем RuntimeError.
    """
    value = os.getenv(name, default)
    if required and (value is None or value == ""):
        raise RuntimeError(f"ENV {name} is required but not set")
    return value if value is not None else ""


def get_env_float(name: str, default: str) -> float:
    raw = get_env(name, default).strip() or default
    try:
        return float(raw)
    except ValueError:
        raise RuntimeError(f"ENV {name} must be a number, got {raw!r}") from None


def get_env_int(name: str, default: str) -> int:
    raw = get_env(name, default).strip() or default
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"ENV {name} must be an integer, got {raw!r}") from None


def get_env_bool(name: str, default: str) -> bool:
    raw = (get_env(name, default).strip() or default).lower()
    if raw in _TRUE:
        return True
    if raw in _FALSE:
        return False
    raise RuntimeError(f"ENV {name} must be a boolean (1/0, true/false), got {raw!r}")


def _check(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise RuntimeError(f"ENV {name} {msg}")


@dataclass(frozen=True)
class SimSettings:
    """
    Все настройки симулятора, собранные в один объект.
    """
    log_level: str
    step_s: float
    radiative_correction: bool
    edge_loss: bool
    couple_electrical: bool
    clamp_negative_qu: bool
    curve_points: int
    csv_precision: int
    workers: int

    @classmethod
    def from_env(cls) -> "SimSettings":
        """
        Считывает настройки из окружения с дефолтами.
        """
        log_level = get_env("PVT_LOG_LEVEL", "INFO").strip().upper() or "INFO"

        step_s = get_env_float("PVT_STEP_S", "60")
        _check(step_s > 0, "PVT_STEP_S", f"must be > 0, got {step_s}")

        radiative_correction = get_env_bool("PVT_RADIATIVE_CORRECTION", "1")
        edge_loss = get_env_bool("PVT_EDGE_LOSS", "1")
        couple_electrical = get_env_bool("PVT_COUPLE_ELECTRICAL", "0")
        clamp_negative_qu = get_env_bool("PVT_CLAMP_NEGATIVE_QU", "0")

        curve_points = get_env_int("PVT_CURVE_POINTS", "100")
        _check(curve_points >= 2, "PVT_CURVE_POINTS", f"must be >= 2, got {curve_points}")
        csv_precision = get_env_int("PVT_CSV_PRECISION", "6")
        _check(csv_precision >= 1, "PVT_CSV_PRECISION", f"must be >= 1, got {csv_precision}")
        workers = get_env_int("PVT_WORKERS", "4")
        _check(workers >= 1, "PVT_WORKERS", f"must be >= 1, got {workers}")

        return cls(
            log_level=log_level,
            step_s=step_s,
            radiative_correction=radiative_correction,
            edge_loss=edge_loss,
            couple_electrical=couple_electrical,
            clamp_negative_qu=clamp_negative_qu,
            curve_points=curve_points,
            csv_precision=csv_precision,
            workers=workers,
        )

    def default_options(self) -> SimulationOptions:
        return SimulationOptions(
            step=self.step_s,
            radiative_correction=self.radiative_correction,
            edge_loss=self.edge_loss,
            couple_electrical=self.couple_electrical,
            clamp_negative_qu=self.clamp_negative_qu,
        )
