"""
Роуты без состояния поверх моделей: извлечение параметров, коэффициенты, MPP.

Тело запроса - тот же JSON, что читает CLI (коллектор или паспорт модуля),
параметры точки - в query string.
"""

from __future__ import annotations

from dataclasses import asdict
from typing import Any, Optional

from flask import Blueprint, current_app, jsonify, request

from pvt.electrical_model import (
    VARIANTS,
    build_diode_model,
    extract_reference_params,
    max_power_point,
    open_circuit_voltage,
)
from pvt.model_params import load_collector_config, load_datasheet
from pvt.thermal_model import derive_coefficients

bp = Blueprint("model", __name__)

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


class QueryError(ValueError):
    pass


def _float_arg(name: str) -> float:
    raw = request.args.get(name, "").strip()
    if not raw:
        raise QueryError(f"query parameter {name} is required")
    try:
        return float(raw)
    except ValueError:
        raise QueryError(f"query parameter {name} must be a number, got {raw!r}") from None


def _bool_arg(name: str, default: bool) -> bool:
    raw = request.args.get(name, "").strip().lower()
    if not raw:
        return default
    if raw in _TRUE:
        return True
    if raw in _FALSE:
        return False
    raise QueryError(f"query parameter {name} must be a boolean, got {raw!r}")


def _optional_float_arg(name: str) -> Optional[float]:
    return _float_arg(name) if request.args.get(name, "").strip() else None


@bp.errorhandler(QueryError)
def bad_query(e: QueryError) -> tuple[Any, int]:
    return jsonify({"error": "bad_request", "detail": str(e)}), 400


@bp.post("/extract")
def extract() -> tuple[Any, int]:
    ref = extract_reference_params(load_datasheet(request.get_data()))
    return jsonify(asdict(ref)), 200


@bp.post("/coeffs")
def coeffs() -> tuple[Any, int]:
    settings = current_app.config["SIM_SETTINGS"]
    T_c = _float_arg("T_c")
    T_a = _float_arg("T_a")
    eta_c = _optional_float_arg("eta_c")
    radiative = _bool_arg("radiative", settings.radiative_correction)
    edge = _bool_arg("edge", settings.edge_loss)

    design = load_collector_config(request.get_data())
    c = derive_coefficients(design, T_c, T_a, eta_c=eta_c, radiative=radiative, edge_loss=edge)
    return jsonify(asdict(c)), 200


@bp.post("/mpp")
def mpp() -> tuple[Any, int]:
    T_c = _float_arg("T_c")
    G = _float_arg("G")
    variant = request.args.get("variant", "series_shunt").strip()
    if variant not in VARIANTS:
        raise QueryError(f"variant must be one of {', '.join(VARIANTS)}")

    ds = load_datasheet(request.get_data())
    model = build_diode_model(ds, extract_reference_params(ds), G, T_c, variant)  # type: ignore[arg-type]
    point = max_power_point(model)
    payload = {"V_mp": point.V, "I_mp": point.I, "P_mp": point.P, "V_oc": open_circuit_voltage(model)}
    return jsonify(payload), 200
