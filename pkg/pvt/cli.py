"""
Командная строка симулятора.

Подкоманды:
- simulate  - прогон по погоде, CSV результатов + сводка JSON в stdout;
- coeffs    - производные коэффициенты при заданных T_c/T_a;
- extract   - опорные параметры однодиодной модели из паспорта;
- iv-curve  - семейство I-V/P-V кривых в длинном формате;
- mpp       - точка максимальной мощности;
- validate  - RMS отклонения симуляции от эксперимента;
- study     - один прогон на каждый шаг по времени.

Коды выхода: 0 успех, 1 ошибка данных/расчёта, 2 ошибка использования (click).
Файлы пишутся только по путям из --out и только после успешного расчёта.
"""

from __future__ import annotations

import functools
import io
import json
import logging
from dataclasses import asdict, replace
from typing import IO, Any, Callable, Optional

import click
import pandas as pd

from pvt.config.settings import SimSettings
from pvt.electrical_model import (
    VARIANTS,
    build_diode_model,
    curve_family,
    electrical_efficiency,
    extract_reference_params,
    max_power_point,
    open_circuit_voltage,
    paired_curves,
    solve_current,
)
from pvt.errors import PvtError
from pvt.logging_setup import setup_logging
from pvt.model_params import (
    CollectorDesign,
    DatasheetSpec,
    load_collector_config,
    load_datasheet,
    load_operating_points,
    load_trace_csv,
    load_weather_csv,
    resample_weather,
)
from pvt.sim_engine import (
    frame_to_csv,
    hourly_table,
    records_to_frame,
    rms_deviation,
    run_simulation,
    step_size_study,
    summarize,
    write_results_csv,
)
from pvt.thermal_model import derive_coefficients
from pvt.utils.env_helpers import get_version_info, parse_float_list

logger = logging.getLogger("pvt.cli")

_POSITIVE = click.FloatRange(min=0, min_open=True)
_INPUT = click.File("rb")
_OUTPUT = click.Path(dir_okay=False, writable=True)


def _float_list(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[list[float]]:
    if value is None:
        return None
    try:
        out = parse_float_list(value)
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}") from None
    if not out:
        raise click.BadParameter("list must not be empty")
    return out


def _handle_errors(fn: Callable[..., Any]) -> Callable[..., Any]:
    """Ошибки домена -> сообщение в stderr и exit 1."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except (PvtError, OSError) as e:
            logger.error("command failed error=%s detail=%s", type(e).__name__, e)
            click.echo(f"error: {e}", err=True)
            raise click.exceptions.Exit(1) from e

    return wrapper


def _settings(ctx: click.Context) -> SimSettings:
    return ctx.obj["settings"]


def _emit_json(payload: Any) -> None:
    click.echo(json.dumps(payload, indent=2, ensure_ascii=False))


def _write_frame(df: pd.DataFrame, out: Optional[str], precision: int) -> None:
    buf = io.StringIO()
    frame_to_csv(df, buf, precision)
    if out is None:
        click.echo(buf.getvalue(), nl=False)
        return
    with open(out, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())


def _load_design(stream: Optional[IO[bytes]]) -> Optional[CollectorDesign]:
    return load_collector_config(stream) if stream is not None else None


def _load_datasheet(stream: Optional[IO[bytes]]) -> Optional[DatasheetSpec]:
    return load_datasheet(stream) if stream is not None else None


@click.group()
@click.pass_context
def cli(ctx: click.Context) -> None:
    """Симулятор гибридного PV/T коллектора."""
    try:
        settings = SimSettings.from_env()
    except RuntimeError as e:
        click.echo(f"error: {e}", err=True)
        raise click.exceptions.Exit(1) from e

    version, _ = get_version_info()
    setup_logging(command=ctx.invoked_subcommand or "pvt", version=version, level=settings.log_level)
    ctx.obj = {"settings": settings, "version": version}


@cli.command()
@click.option("--design", "design_file", type=_INPUT, required=True, help="Collector JSON.")
@click.option("--datasheet", "datasheet_file", type=_INPUT, default=None, help="PV module JSON (enables MPP columns).")
@click.option("--weather", "weather_file", type=_INPUT, required=True, help="CSV time,irradiance,ambient.")
@click.option("--step", type=_POSITIVE, default=None, help="Time step, s (default PVT_STEP_S).")
@click.option("--couple", is_flag=True, help="Feed the MPP efficiency back into the cell balance.")
@click.option("--no-rad", is_flag=True, help="Disable the radiative top-loss correction.")
@click.option("--no-edge", is_flag=True, help="Disable edge losses.")
@click.option("--clamp", is_flag=True, help="Pump off when the collector gain is negative.")
@click.option("--out", type=_OUTPUT, required=True, help="Result CSV path.")
@click.option("--hourly-out", type=_OUTPUT, default=None, help="Optional on-the-hour table CSV.")
@click.pass_context
@_handle_errors
def simulate(
    ctx: click.Context,
    design_file: IO[bytes],
    datasheet_file: Optional[IO[bytes]],
    weather_file: IO[bytes],
    step: Optional[float],
    couple: bool,
    no_rad: bool,
    no_edge: bool,
    clamp: bool,
    out: str,
    hourly_out: Optional[str],
) -> None:
    settings = _settings(ctx)
    design = load_collector_config(design_file)
    datasheet = _load_datasheet(datasheet_file)
    weather = load_weather_csv(weather_file)

    opts = replace(
        settings.default_options(),
        step=step or settings.step_s,
        radiative_correction=settings.radiative_correction and not no_rad,
        edge_loss=settings.edge_loss and not no_edge,
        couple_electrical=settings.couple_electrical or couple,
        clamp_negative_qu=settings.clamp_negative_qu or clamp,
    )
    grid = resample_weather(weather, opts.step)
    records = run_simulation(design, datasheet, grid, opts)

    summary = summarize(records, design, grid, opts)
    summary["version"] = ctx.obj["version"]

    with open(out, "w", encoding="utf-8", newline="") as f:
        write_results_csv(records, f, precision=settings.csv_precision)
    if hourly_out is not None:
        _write_frame(records_to_frame(hourly_table(records)), hourly_out, settings.csv_precision)

    logger.info("simulate ok records=%s out=%s", len(records), out)
    _emit_json(summary)


@cli.command()
@click.option("--design", "design_file", type=_INPUT, required=True)
@click.option("--tc", type=float, required=True, help="Cell temperature guess, °C.")
@click.option("--ta", type=float, required=True, help="Ambient temperature, °C.")
@click.option("--eta-c", type=click.FloatRange(0, 1, max_open=True), default=None, help="Cell efficiency (default eta_c_ref).")
@click.option("--no-rad", is_flag=True)
@click.option("--no-edge", is_flag=True)
@click.pass_context
@_handle_errors
def coeffs(
    ctx: click.Context,
    design_file: IO[bytes],
    tc: float,
    ta: float,
    eta_c: Optional[float],
    no_rad: bool,
    no_edge: bool,
) -> None:
    settings = _settings(ctx)
    design = load_collector_config(design_file)
    c = derive_coefficients(
        design,
        tc,
        ta,
        eta_c=eta_c,
        radiative=settings.radiative_correction and not no_rad,
        edge_loss=settings.edge_loss and not no_edge,
    )
    _emit_json(asdict(c))


@cli.command()
@click.option("--datasheet", "datasheet_file", type=_INPUT, required=True)
@_handle_errors
def extract(datasheet_file: IO[bytes]) -> None:
    ref = extract_reference_params(load_datasheet(datasheet_file))
    _emit_json(asdict(ref))


@cli.command("iv-curve")
@click.option("--datasheet", "datasheet_file", type=_INPUT, required=True)
@click.option("--temps", callback=_float_list, default=None, help="Cell temperatures, °C: 25,50,75.")
@click.option("--irr", callback=_float_list, default=None, help="Irradiances, W/m²: 250,500,1000.")
@click.option(
    "--from-hourly",
    "hourly_file",
    type=_INPUT,
    default=None,
    help="CSV with T_c and G columns (e.g. simulate --hourly-out): one curve per row.",
)
@click.option("--points", type=click.IntRange(min=2), default=None, help="Points per curve (default PVT_CURVE_POINTS).")
@click.option("--variant", type=click.Choice(VARIANTS), default="series_shunt", show_default=True)
@click.option("--out", type=_OUTPUT, default=None, help="CSV path; stdout when omitted.")
@click.pass_context
@_handle_errors
def iv_curve(
    ctx: click.Context,
    datasheet_file: IO[bytes],
    temps: Optional[list[float]],
    irr: Optional[list[float]],
    hourly_file: Optional[IO[bytes]],
    points: Optional[int],
    variant: str,
    out: Optional[str],
) -> None:
    if hourly_file is not None and (temps or irr):
        raise click.UsageError("--from-hourly excludes --temps/--irr")
    if hourly_file is None and not (temps and irr):
        raise click.UsageError("give --temps and --irr, or --from-hourly")

    settings = _settings(ctx)
    ds = load_datasheet(datasheet_file)
    ref = extract_reference_params(ds)
    n_points = points or settings.curve_points
    if hourly_file is not None:
        pairs = load_operating_points(hourly_file)
        family = paired_curves(ds, ref, pairs, n_points, variant=variant, workers=settings.workers)  # type: ignore[arg-type]
    else:
        family = curve_family(ds, ref, temps, irr, n_points, variant=variant, workers=settings.workers)  # type: ignore[arg-type]
    df = pd.DataFrame(
        [(p.T_c, p.G, p.point.V, p.point.I, p.point.P) for p in family],
        columns=["T_c", "G", "V", "I", "P"],
    )
    _write_frame(df, out, settings.csv_precision)


@cli.command()
@click.option("--datasheet", "datasheet_file", type=_INPUT, required=True)
@click.option("--temp", type=float, required=True, help="Cell temperature, °C.")
@click.option("--irr", type=click.FloatRange(min=0), required=True, help="Irradiance, W/m².")
@click.option("--design", "design_file", type=_INPUT, default=None, help="Collector JSON, for η_e.")
@click.option("--variant", type=click.Choice(VARIANTS), default="series_shunt", show_default=True)
@_handle_errors
def mpp(
    datasheet_file: IO[bytes],
    temp: float,
    irr: float,
    design_file: Optional[IO[bytes]],
    variant: str,
) -> None:
    ds = load_datasheet(datasheet_file)
    design = _load_design(design_file)
    model = build_diode_model(ds, extract_reference_params(ds), irr, temp, variant)  # type: ignore[arg-type]
    point = max_power_point(model)

    payload: dict[str, Any] = {
        "V_mp": point.V,
        "I_mp": point.I,
        "P_mp": point.P,
        "V_oc": open_circuit_voltage(model),
        "I_sc": solve_current(model, 0.0),
    }
    if design is not None and irr > 0:
        payload["eta_e"] = electrical_efficiency(point, design.A_c, irr)
    _emit_json(payload)


@cli.command()
@click.option("--sim", "sim_file", type=_INPUT, required=True, help="Simulated trace CSV (t or time column).")
@click.option("--exp", "exp_file", type=_INPUT, required=True, help="Experimental trace CSV.")
@click.option("--column", required=True, help="Value column present in both files, e.g. T_w.")
@click.option("--tolerance", type=_POSITIVE, default=None, help="Max pairing distance, s (default half a step).")
@click.option("--residuals", is_flag=True, help="Include every paired residual in the output.")
@_handle_errors
def validate(
    sim_file: IO[bytes],
    exp_file: IO[bytes],
    column: str,
    tolerance: Optional[float],
    residuals: bool,
) -> None:
    report = rms_deviation(load_trace_csv(sim_file, column), load_trace_csv(exp_file, column), tolerance)
    payload = report.to_dict()
    if not residuals:
        payload.pop("pairs")
    payload["column"] = column
    _emit_json(payload)


@cli.command()
@click.option("--design", "design_file", type=_INPUT, required=True)
@click.option("--datasheet", "datasheet_file", type=_INPUT, default=None)
@click.option("--weather", "weather_file", type=_INPUT, required=True)
@click.option("--steps", callback=_float_list, required=True, help="Time steps, s: 60,3600.")
@click.option("--no-rad", is_flag=True)
@click.option("--no-edge", is_flag=True)
@click.option("--out", type=_OUTPUT, default=None, help="CSV path; stdout when omitted.")
@click.pass_context
@_handle_errors
def study(
    ctx: click.Context,
    design_file: IO[bytes],
    datasheet_file: Optional[IO[bytes]],
    weather_file: IO[bytes],
    steps: list[float],
    no_rad: bool,
    no_edge: bool,
    out: Optional[str],
) -> None:
    settings = _settings(ctx)
    design = load_collector_config(design_file)
    datasheet = _load_datasheet(datasheet_file)
    weather = load_weather_csv(weather_file)

    opts = replace(
        settings.default_options(),
        radiative_correction=settings.radiative_correction and not no_rad,
        edge_loss=settings.edge_loss and not no_edge,
    )
    runs = step_size_study(design, datasheet, weather, steps, opts, workers=settings.workers)

    frames = [records_to_frame(records).assign(step=step) for step, records in runs.items()]
    df = pd.concat(frames, ignore_index=True)
    df = df[["step", *[c for c in df.columns if c != "step"]]]
    _write_frame(df, out, settings.csv_precision)


def main() -> None:
    cli(prog_name="pvt")
