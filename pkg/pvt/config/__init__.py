"""
Конфигурация симулятора (env -> SimSettings).
"""
