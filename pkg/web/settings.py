"""
Настройки web-сервиса.

Задачи модуля:
- единая точка чтения env для web;
- дефолты расчёта берутся из тех же PVT_* переменных, что и у CLI.
"""

from __future__ import annotations

from pvt.config.settings import SimSettings, get_env
from pvt.utils.env_helpers import get_version_info


def get_environment() -> str:
    return get_env("ENVIRONMENT", "unknown")


def get_version() -> str:
    return get_version_info()[0]


def build_flask_config() -> dict[str, object]:
    """
    Собирает словарь для app.config.

    Ошибка в PVT_* переменных роняет старт приложения (RuntimeError из SimSettings).
    """
    settings = SimSettings.from_env()
    return {
        "ENVIRONMENT": get_environment(),
        "VERSION": get_version(),
        "SIM_SETTINGS": settings,
        "MAX_CONTENT_LENGTH": 64 * 1024,
    }
