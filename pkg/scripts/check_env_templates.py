"""
Проверка эталонного env-файла симулятора.

Быстрый sanity-check перед релизом:
- в env_example есть все PVT_* ключи, которые читает SimSettings;
- значения из шаблона проходят валидацию SimSettings.from_env().

Запуск из корня репозитория: python scripts/check_env_templates.py
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from pvt.config.settings import SimSettings  # noqa: E402

REQUIRED_KEYS = {
    "PVT_LOG_LEVEL",
    "PVT_STEP_S",
    "PVT_RADIATIVE_CORRECTION",
    "PVT_EDGE_LOSS",
    "PVT_COUPLE_ELECTRICAL",
    "PVT_CLAMP_NEGATIVE_QU",
    "PVT_CURVE_POINTS",
    "PVT_CSV_PRECISION",
    "PVT_WORKERS",
}

TEMPLATE_FILES = [
    PROJECT_ROOT / "env_example",
]


def parse_env(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, value = line.split("=", 1)
        key = key.strip()
        if key:
            values[key] = value.strip()
    return values


def check_template(path: Path) -> list[str]:
    if not path.exists():
        return [f"Template file not found: {path}"]

    values = parse_env(path.read_text(encoding="utf-8"))
    errors: list[str] = []
    missing = REQUIRED_KEYS - set(values)
    if missing:
        errors.append(f"{path.name}: missing keys: {', '.join(sorted(missing))}")

    saved = {k: os.environ.get(k) for k in values}
    try:
        os.environ.update(values)
        SimSettings.from_env()
    except RuntimeError as e:
        errors.append(f"{path.name}: {e}")
    finally:
        for k, v in saved.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v
    return errors


def main() -> None:
    errors: list[str] = []
    for p in TEMPLATE_FILES:
        errors.extend(check_template(p))

    if errors:
        raise SystemExit("ENV template check failed:\n" + "\n".join(errors))

    print("ENV template check passed.")


if __name__ == "__main__":
    main()
