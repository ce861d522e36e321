"""
WSGI entrypoint web-сервиса симулятора: gunicorn app:app.

Сборка приложения - в web/app.py (app factory).
"""

from __future__ import annotations

import os

from web.app import create_app

app = create_app()


if __name__ == "__main__":
    app.run(host="127.0.0.1", port=int(os.getenv("PORT", "8000")))
