"""
Настройка логирования симулятора и web-сервиса.

Формат key=value: строки легко грепать и парсить.
Все модули пишут в дерево логгеров "pvt.*" (web - в "pvt.web"), handler один,
на корневом "pvt".
"""

from __future__ import annotations

import logging
from typing import Any

ROOT_LOGGER = "pvt"

_CONTEXT_FIELDS = ("command", "environment", "version")


class ContextAdapter(logging.LoggerAdapter):
    """
    Добавляет в каждый лог command, environment и version.
    """

    def process(self, msg: str, kwargs: dict[str, Any]) -> tuple[str, dict[str, Any]]:
        extra = kwargs.get("extra", {})
        for field in _CONTEXT_FIELDS:
            extra.setdefault(field, self.extra.get(field, "unknown"))
        kwargs["extra"] = extra
        return msg, kwargs


class _ContextFilter(logging.Filter):
    """Подставляет поля контекста в записи дочерних логгеров (pvt.thermal и т.д.)."""

    def __init__(self, context: dict[str, str]) -> None:
        super().__init__()
        self.context = context

    def filter(self, record: logging.LogRecord) -> bool:
        for field, value in self.context.items():
            if not hasattr(record, field):
                setattr(record, field, value)
        return True


def setup_logging(
    *,
    command: str,
    version: str = "unknown",
    level: str = "INFO",
    environment: str = "local",
    name: str = ROOT_LOGGER,
) -> ContextAdapter:
    """
    Настраивает логирование в формате key=value (stderr).

    name - логгер, к которому привязан адаптер (например "pvt.web").
    Повторный вызов не добавляет второй handler, только обновляет уровень и контекст.
    """
    root = logging.getLogger(ROOT_LOGGER)
    root.setLevel(getattr(logging, level.upper(), logging.INFO))
    context = {"command": command, "environment": environment, "version": version}
    adapter = ContextAdapter(logging.getLogger(name), dict(context))

    if root.handlers:
        for handler in root.handlers:
            for f in handler.filters:
                if isinstance(f, _ContextFilter):
                    f.context = context
        return adapter

    handler = logging.StreamHandler()
    handler.addFilter(_ContextFilter(context))
    formatter = logging.Formatter(
        fmt=(
            "ts=%(asctime)s level=%(levelname)s service=pvt "
            "command=%(command)s env=%(environment)s version=%(version)s "
            "logger=%(name)s msg=%(message)s"
        )
    )
    handler.setFormatter(formatter)
    root.addHandler(handler)
    root.propagate = False

    return adapter
