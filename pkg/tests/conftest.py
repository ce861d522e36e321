# tests/conftest.py
"""
Конфигурация pytest.

Добавляем корень проекта в sys.path, чтобы тесты могли
импортировать pvt/, web/ и app.py из корня репозитория.

Общие фикстуры: конструкция коллектора и паспорт MSX-60 из data/.
"""

import logging
import os
import sys
from pathlib import Path

import pytest

# Корень проекта = родительская директория папки tests
PROJECT_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = PROJECT_ROOT / "data"

if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from pvt.electrical_model import extract_reference_params  # noqa: E402
from pvt.model_params import load_collector_config, load_datasheet  # noqa: E402


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Каждый тест стартует с дефолтными PVT_* и без handler'ов от прошлых тестов."""
    for key in list(os.environ):
        if key.startswith("PVT_"):
            monkeypatch.delenv(key, raising=False)
    for name in ("pvt", "pvt.web"):
        logging.getLogger(name).handlers.clear()


@pytest.fixture
def design_bytes() -> bytes:
    return (DATA_DIR / "collector_reference.json").read_bytes()


@pytest.fixture
def datasheet_bytes() -> bytes:
    return (DATA_DIR / "msx60.json").read_bytes()


@pytest.fixture
def design(design_bytes: bytes):
    return load_collector_config(design_bytes)


@pytest.fixture
def datasheet(datasheet_bytes: bytes):
    return load_datasheet(datasheet_bytes)


@pytest.fixture
def reference(datasheet):
    return extract_reference_params(datasheet)
