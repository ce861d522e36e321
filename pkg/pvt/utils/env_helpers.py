"""
Хелперы окружения: версия сборки и разбор списков из строк.

Версия пишется в каждую строку лога и в сводку прогона, чтобы результаты
можно было сопоставить с кодом, которым они получены.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional


def parse_float_list(raw: str) -> list[float]:
    """
    Парсит список float из строки вида "25, 50,75".

    Пустые элементы пропускаются, нечисловые дают ValueError.
    """
    out: list[float] = []
    for part in (raw or "").split(","):
        part = part.strip()
        if not part:
            continue
        out.append(float(part))
    return out


def get_version_info() -> tuple[str, str]:
    """
    Возвращает (version, source).
    Приоритет:
    1) APP_VERSION (release)
    2) git sha из .git (dev)
    3) unknown
    """
    app_version = os.getenv("APP_VERSION", "").strip()
    if app_version:
        return app_version, "app_version"

    git_sha = _read_git_sha()
    if git_sha:
        return git_sha, "git"

    return "unknown", "unknown"


def _read_git_sha() -> Optional[str]:
    repo_root = os.getenv("REPO_ROOT", "").strip()
    base = Path(repo_root) if repo_root else Path.cwd()
    git_dir = base / ".git"
    head = _read_text(git_dir / "HEAD")
    if not head:
        return None
    if not head.startswith("ref:"):
        return head

    ref = head.split("ref:", 1)[1].strip()
    sha = _read_text(git_dir / ref)
    if sha:
        return sha
    return _read_packed_ref(git_dir / "packed-refs", ref)


def _read_text(path: Path) -> Optional[str]:
    try:
        return path.read_text(encoding="utf-8").strip()
    except OSError:
        return None


def _read_packed_ref(path: Path, ref: str) -> Optional[str]:
    content = _read_text(path)
    if content is None:
        return None
    for line in content.splitlines():
        if not line or line.startswith(("#", "^")):
            continue
        parts = line.split()
        if len(parts) == 2 and parts[1] == ref:
            return parts[0]
    return None
