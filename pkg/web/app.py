"""
App factory для web-сервиса.

Сюда вынесена сборка Flask-приложения:
- конфигурация из env;
- логирование;
- регистрация роутов и обработчика ошибок домена.
"""

from __future__ import annotations

from typing import Any

from flask import Flask, jsonify

from pvt.errors import PvtError
from pvt.logging_setup import setup_logging
from web.routes import health as health_routes
from web.routes import model as model_routes
from web.settings import build_flask_config


def create_app() -> Flask:
    """
    Создаёт и конфигурирует Flask-приложение.
    """
    app = Flask(__name__)

    # 1) Загружаем конфиг из env.
    cfg = build_flask_config()
    app.config.update(cfg)

    # 2) Настраиваем логирование и сохраняем адаптер в app.config.
    logger = setup_logging(
        command="web",
        environment=app.config.get("ENVIRONMENT", "unknown"),
        version=app.config.get("VERSION", "unknown"),
        level=app.config["SIM_SETTINGS"].log_level,
        name="pvt.web",
    )
    app.config["APP_LOGGER"] = logger

    # 3) Ошибки модели -> 422 с именем класса.
    @app.errorhandler(PvtError)
    def handle_model_error(e: PvtError) -> tuple[Any, int]:
        logger.info("model error error=%s detail=%s", type(e).__name__, e)
        return jsonify({"error": type(e).__name__, "detail": str(e)}), 422

    # 4) Регистрируем роуты.
    app.register_blueprint(health_routes.bp)
    app.register_blueprint(model_routes.bp)

    return app
