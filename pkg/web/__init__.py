"""
Пакет web-сервиса.

HTTP-обёртка над моделями из pvt: app factory, роуты, настройки, логирование.
Состояние между запросами не хранится.
"""
