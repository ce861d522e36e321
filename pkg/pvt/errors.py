"""
Исключения симулятора PV/T.

Одна иерархия на весь пакет:
- CLI превращает PvtError в exit code 1 (ошибки использования click сам отдаёт с кодом 2);
- web превращает PvtError в HTTP 422.
"""

from __future__ import annotations

from typing import Optional


class PvtError(Exception):
    """Базовая ошибка домена."""


class ConfigValidationError(PvtError, ValueError):
    """
    Входной документ (JSON/CSV) не прошёл проверку.

    field - имя поля, к которому относится ошибка (если известно).
    """

    def __init__(self, msg: str, field: Optional[str] = None) -> None:
        super().__init__(msg)
        self.field = field


class MissingFieldError(ConfigValidationError):
    def __init__(self, field: str) -> None:
        super().__init__(f"missing required field: {field}", field=field)


class WeatherOrderError(ConfigValidationError):
    pass


class SeriesSizeError(ConfigValidationError):
    pass


class ArgumentError(PvtError, ValueError):
    pass


class DegenerateReferenceError(PvtError):
    """h_rad, отнесённый к T_a, не определён при T_c <= T_a."""


class UndefinedEfficiencyError(PvtError):
    pass


class InternalConsistencyError(PvtError):
    pass


class DegenerateDatasheetError(PvtError):
    pass


class InconsistentDatasheetError(PvtError):
    pass


class ZeroSimulatedValueError(PvtError, ZeroDivisionError):
    """Отклонение нормируется на симулированное значение, а оно равно нулю."""


class SolverError(PvtError):
    """
    Решатель I-V не справился.

    step_index заполняет sim_engine, чтобы было видно, на каком шаге упали.
    """

    def __init__(self, msg: str, step_index: Optional[int] = None) -> None:
        if step_index is not None:
            msg = f"step {step_index}: {msg}"
        super().__init__(msg)
        self.step_index = step_index


def require(cond: bool, msg: str, field: Optional[str] = None) -> None:
    if not cond:
        raise ConfigValidationError(msg, field=field)
