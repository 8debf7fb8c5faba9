"""Command line front end.

Thin client over the service handlers: every subcommand parses flags into a
RunConfig, builds the matching request model and calls the same handler the
HTTP endpoints use. Exit codes: 0 success, 2 usage errors (unknown flags,
presets or parameter names), 3 input-data and parameter errors, 4 regime or
solvability violations, 1 anything else.

Frequency flags take rad/s; pass --hz to multiply them by 2 pi at the
boundary (column headers and outputs stay in rad/s). GUPNOISE_THREADS sets
the sweep thread count.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
from pydantic import ValidationError

from .dataio import OutputFormat, emit, ingest_observed
from .errors import (
    GupNoiseError,
    InputDataError,
    InvalidParameterError,
    OracleError,
    RegimeValidityError,
    UnboundedBoundError,
)
from .ligo import ALIGO_IFO
from .model import PRESET_NAMES
from .schemas import (
    OVERRIDE_KEYS,
    BoundCurveRequest,
    BoundRequest,
    DeltaSpectrumRequest,
    GridModel,
    ObservedCurveModel,
    OracleRequest,
    SpectrumRequest,
    SqlRequest,
    SweepRequest,
    TranslateLigoRequest,
)
from .service import (
    handle_bound,
    handle_bound_curve,
    handle_delta_spectrum,
    handle_oracle,
    handle_presets,
    handle_spectrum,
    handle_sql,
    handle_sweep,
    handle_translate_ligo,
)


class Command(enum.Enum):
    SPECTRUM = "spectrum"
    DELTA_SPECTRUM = "delta-spectrum"
    BOUND = "bound"
    BOUND_CURVE = "bound-curve"
    SWEEP = "sweep"
    SQL = "sql"
    TRANSLATE_LIGO = "translate-ligo"
    ORACLE = "oracle"
    PRESETS = "presets"


@dataclass(frozen=True)
class RunConfig:
    """Fully parsed invocation; run() turns it into a request and a result."""

    command: Command
    preset: str | None = None
    overrides: tuple[tuple[str, str], ...] = ()
    grid: GridModel | None = None
    output_path: str | None = None
    format: OutputFormat | None = None
    options: dict = field(default_factory=dict)


_DEFAULT_FORMAT = {
    Command.SPECTRUM: OutputFormat.CSV,
    Command.DELTA_SPECTRUM: OutputFormat.CSV,
    Command.BOUND: OutputFormat.JSON,
    Command.BOUND_CURVE: OutputFormat.CSV,
    Command.SWEEP: OutputFormat.CSV,
    Command.SQL: OutputFormat.JSON,
    Command.TRANSLATE_LIGO: OutputFormat.JSON,
    Command.ORACLE: OutputFormat.CSV,
    Command.PRESETS: OutputFormat.JSON,
}


def _check_preset(name: str | None) -> str | None:
    if name is not None and name not in PRESET_NAMES:
        raise click.UsageError(
            f"unknown preset {name!r}; known presets: {', '.join(PRESET_NAMES)}"
        )
    return name


def _parse_overrides(pairs: tuple[str, ...]) -> tuple[tuple[str, str], ...]:
    out = []
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise click.UsageError(f"override must look like NAME=VALUE, got {pair!r}")
        if key not in OVERRIDE_KEYS:
            raise click.UsageError(
                f"unknown parameter {key!r}; known: {', '.join(OVERRIDE_KEYS)}"
            )
        out.append((key, value))
    return tuple(out)


def _system_options(fn):
    fn = click.option(
        "--override",
        "override_pairs",
        multiple=True,
        metavar="NAME=VALUE",
        help="Replace one parameter after the preset loads; repeatable.",
    )(fn)
    fn = click.option("--preset", "preset_name", default=None, help="Named system to start from.")(fn)
    return fn


def _output_options(fn):
    fn = click.option(
        "--format",
        "format_name",
        type=click.Choice(["csv", "json"]),
        default=None,
        help="Output format; defaults to CSV for tables and JSON for single results.",
    )(fn)
    fn = click.option("-o", "--output", "output_path", default=None, help="Write to a file instead of stdout.")(fn)
    return fn


def _grid_options(fn):
    fn = click.option("--spacing", type=click.Choice(["log", "linear"]), default="log")(fn)
    fn = click.option("--points", type=int, default=200, show_default=True)(fn)
    fn = click.option("--omega-max", type=float, default=None, help="Grid top, rad/s.")(fn)
    fn = click.option("--omega-min", type=float, default=None, help="Grid bottom, rad/s.")(fn)
    fn = click.option("--hz", is_flag=True, help="Interpret frequency flags as Hz.")(fn)
    return fn


def _build_grid(omega_min, omega_max, points, spacing, hz, required=True) -> GridModel | None:
    if omega_min is None and omega_max is None:
        if required:
            raise click.UsageError("--omega-min and --omega-max are required")
        return None
    if omega_min is None or omega_max is None:
        raise click.UsageError("give both --omega-min and --omega-max")
    factor = 2.0 * math.pi if hz else 1.0
    try:
        return GridModel(
            omega_min=omega_min * factor,
            omega_max=omega_max * factor,
            points=points,
            spacing=spacing,
        )
    except ValueError as exc:
        raise click.UsageError(f"bad frequency grid: {exc}") from None


def _parse_scales(text: str) -> tuple[float, ...]:
    if ".." in text:
        lo_s, _, hi_s = text.partition("..")
        try:
            lo, hi = float(lo_s), float(hi_s)
        except ValueError:
            raise click.UsageError(f"bad scale range {text!r}") from None
        if not (0 < lo < hi):
            raise click.UsageError("scale range must be positive and increasing")
        decades = math.log10(hi / lo)
        n = round(decades)
        if abs(decades - n) > 1e-9:
            raise click.UsageError("scale range must span whole decades, e.g. 1e-3..1e3")
        return tuple(lo * 10.0**k for k in range(n + 1))
    try:
        return tuple(float(s) for s in text.split(","))
    except ValueError:
        raise click.UsageError(f"bad scale list {text!r}") from None


def _parse_omega(text: str, hz: bool):
    if text in ("resonance", "sql"):
        return text
    try:
        value = float(text)
    except ValueError:
        raise click.UsageError(
            f"--omega must be a number, 'resonance' or 'sql', got {text!r}"
        ) from None
    return value * (2.0 * math.pi if hz else 1.0)


@click.group(name="gupnoise")
def cli() -> None:
    """Displacement-noise spectra and modified-commutator bounds."""


def _store(ctx: click.Context, config: RunConfig) -> None:
    ctx.obj["config"] = config


@cli.command()
@_system_options
@_grid_options
@_output_options
@click.option("--no-shot", is_flag=True, help="Drop the shot-noise floor.")
@click.pass_context
def spectrum(ctx, preset_name, override_pairs, omega_min, omega_max, points, spacing, hz, output_path, format_name, no_shot):
    """Standard displacement PSD over a frequency grid."""
    _store(
        ctx,
        RunConfig(
            command=Command.SPECTRUM,
            preset=_check_preset(preset_name),
            overrides=_parse_overrides(override_pairs),
            grid=_build_grid(omega_min, omega_max, points, spacing, hz),
            output_path=output_path,
            format=OutputFormat(format_name) if format_name else None,
            options={"include_shot": not no_shot},
        ),
    )


@cli.command(name="delta-spectrum")
@_system_options
@_grid_options
@_output_options
@click.option("--beta0", type=float, default=1.0, show_default=True)
@click.option("--form", type=click.Choice(["general", "adiabatic"]), default="general", show_default=True)
@click.pass_context
def delta_spectrum(ctx, preset_name, override_pairs, omega_min, omega_max, points, spacing, hz, output_path, format_name, beta0, form):
    """First-order spectrum perturbation deltaS for a given beta0."""
    _store(
        ctx,
        RunConfig(
            command=Command.DELTA_SPECTRUM,
            preset=_check_preset(preset_name),
            overrides=_parse_overrides(override_pairs),
            grid=_build_grid(omega_min, omega_max, points, spacing, hz),
            output_path=output_path,
            format=OutputFormat(format_name) if format_name else None,
            options={"beta0": beta0, "form": form},
        ),
    )


@cli.command()
@_system_options
@_output_options
@click.option("--omega", required=True, help="Evaluation frequency in rad/s, or 'resonance'/'sql'.")
@click.option("--hz", is_flag=True, help="Interpret --omega as Hz.")
@click.option("--criterion", type=click.Choice(["relative-noise", "fixed-target"]), default="fixed-target", show_default=True)
@click.option("--target", type=float, default=None, help="Fixed target PSD, m^2/Hz.")
@click.option("--form", type=click.Choice(["general", "adiabatic"]), default="general", show_default=True)
@click.pass_context
def bound(ctx, preset_name, override_pairs, output_path, format_name, omega, hz, criterion, target, form):
    """Upper bound on beta0 and beta_e at one frequency."""
    _store(
        ctx,
        RunConfig(
            command=Command.BOUND,
            preset=_check_preset(preset_name),
            overrides=_parse_overrides(override_pairs),
            output_path=output_path,
            format=OutputFormat(format_name) if format_name else None,
            options={
                "omega": _parse_omega(omega, hz),
                "criterion": criterion,
                "target": target,
                "form": form,
            },
        ),
    )


@cli.command(name="bound-curve")
@_system_options
@_grid_options
@_output_options
@click.option("--observed", "observed_path", default=None, help="Measured PSD file (CSV or JSON).")
@click.option("--criterion", type=click.Choice(["relative-noise", "fixed-target"]), default="relative-noise", show_default=True)
@click.option("--target", type=float, default=None, help="Fixed target PSD, m^2/Hz.")
@click.option("--form", type=click.Choice(["general", "adiabatic"]), default="general", show_default=True)
@click.pass_context
def bound_curve(ctx, preset_name, override_pairs, omega_min, omega_max, points, spacing, hz, output_path, format_name, observed_path, criterion, target, form):
    """Per-frequency bounds plus the headline (minimum finite) bound."""
    grid = _build_grid(omega_min, omega_max, points, spacing, hz, required=observed_path is None)
    _store(
        ctx,
        RunConfig(
            command=Command.BOUND_CURVE,
            preset=_check_preset(preset_name),
            overrides=_parse_overrides(override_pairs),
            grid=grid,
            output_path=output_path,
            format=OutputFormat(format_name) if format_name else None,
            options={
                "observed_path": observed_path,
                "criterion": criterion,
                "target": target,
                "form": form,
            },
        ),
    )


@cli.command()
@_system_options
@_grid_options
@_output_options
@click.option(
    "--variable",
    required=True,
    type=click.Choice(["mass", "omega", "power", "kappa", "length", "q", "temperature"]),
)
@click.option("--scales", required=True, help="Comma list, or a whole-decade range like 1e-3..1e3.")
@click.option("--side", "side_of_resonance", is_flag=True, help="Evaluate at Omega + gamma/2 per scale.")
@click.option("--criterion", type=click.Choice(["relative-noise", "fixed-target"]), default="relative-noise", show_default=True)
@click.option("--target", type=float, default=None)
@click.option("--form", type=click.Choice(["general", "adiabatic"]), default="general", show_default=True)
@click.pass_context
def sweep(ctx, preset_name, override_pairs, omega_min, omega_max, points, spacing, hz, output_path, format_name, variable, scales, side_of_resonance, criterion, target, form):
    """Best bound as one system parameter is rescaled."""
    grid = _build_grid(omega_min, omega_max, points, spacing, hz, required=not side_of_resonance)
    _store(
        ctx,
        RunConfig(
            command=Command.SWEEP,
            preset=_check_preset(preset_name),
            overrides=_parse_overrides(override_pairs),
            grid=grid,
            output_path=output_path,
            format=OutputFormat(format_name) if format_name else None,
            options={
                "variable": variable,
                "scales": _parse_scales(scales),
                "side": side_of_resonance,
                "criterion": criterion,
                "target": target,
                "form": form,
            },
        ),
    )


@cli.command()
@_system_options
@_output_options
@click.option("--numeric", is_flag=True, help="Also report the grid argmin of the full spectrum.")
@click.pass_context
def sql(ctx, preset_name, override_pairs, output_path, format_name, numeric):
    """Standard-quantum-limit frequency of the resolved system."""
    _store(
        ctx,
        RunConfig(
            command=Command.SQL,
            preset=_check_preset(preset_name),
            overrides=_parse_overrides(override_pairs),
            output_path=output_path,
            format=OutputFormat(format_name) if format_name else None,
            options={"numeric": numeric},
        ),
    )


@cli.command(name="translate-ligo")
@_output_options
@click.option("--input", "input_path", default=None, help="Interferometer JSON; omitted means the built-in aLIGO table.")
@click.option("--name", default=None, help="Name for the translated preset.")
@click.pass_context
def translate_ligo(ctx, output_path, format_name, input_path, name):
    """Fold an interferometer into an equivalent single-cavity system."""
    _store(
        ctx,
        RunConfig(
            command=Command.TRANSLATE_LIGO,
            output_path=output_path,
            format=OutputFormat(format_name) if format_name else None,
            options={"input": input_path, "name": name},
        ),
    )


@cli.command()
@_system_options
@_output_options
@click.option("--beta0", type=float, default=0.0, show_default=True)
@click.option("--dt", type=float, default=None, help="Step, s; defaults just under the resolution cap.")
@click.option("--segments", type=int, default=12, show_default=True, help="Time segments per realization.")
@click.option("--segment-periods", type=float, default=40.0, show_default=True, help="Mechanical periods per segment.")
@click.option("--burn-in", type=float, default=None, help="Settling time, s; defaults to ten damping times.")
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--realizations", type=int, default=2, show_default=True)
@click.option("--window", type=click.Choice(["hann", "rect"]), default="hann", show_default=True)
@click.pass_context
def oracle(ctx, preset_name, override_pairs, output_path, format_name, beta0, dt, segments, segment_periods, burn_in, seed, realizations, window):
    """Monte-Carlo PSD estimate from the time-domain simulation."""
    _store(
        ctx,
        RunConfig(
            command=Command.ORACLE,
            preset=_check_preset(preset_name),
            overrides=_parse_overrides(override_pairs),
            output_path=output_path,
            format=OutputFormat(format_name) if format_name else None,
            options={
                "beta0": beta0,
                "dt": dt,
                "segments": segments,
                "segment_periods": segment_periods,
                "burn_in": burn_in,
                "seed": seed,
                "realizations": realizations,
                "window": window,
            },
        ),
    )


@cli.command()
@_output_options
@click.pass_context
def presets(ctx, output_path, format_name):
    """List the built-in systems."""
    _store(
        ctx,
        RunConfig(
            command=Command.PRESETS,
            output_path=output_path,
            format=OutputFormat(format_name) if format_name else None,
        ),
    )


def parse_args(argv) -> RunConfig:
    """Parse CLI arguments into a RunConfig without executing anything.

    Raises click.UsageError (or another ClickException) on bad input and
    click.exceptions.Exit when --help was requested.
    """
    holder: dict = {}
    cli.main(args=list(argv), prog_name="gupnoise", standalone_mode=False, obj=holder)
    config = holder.get("config")
    if config is None:
        # recent click prints --help and returns instead of raising Exit
        raise click.exceptions.Exit(0)
    return config


def _system_payload(config: RunConfig) -> dict:
    if config.preset is None:
        raise click.UsageError("--preset is required")
    return {"preset": config.preset, "overrides": dict(config.overrides)}


def _aligo_mapping() -> dict:
    return {k: v for k, v in dataclasses.asdict(ALIGO_IFO).items() if v is not None}


def _load_interferometer(path: str | None) -> dict:
    if path is None:
        return _aligo_mapping()
    try:
        payload = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputDataError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise InputDataError(f"{path}: expected a JSON object of interferometer parameters")
    return payload


def run(config: RunConfig) -> str:
    """Execute a parsed invocation and return the serialized artifact."""
    opts = config.options
    if config.command is Command.SPECTRUM:
        resp = handle_spectrum(
            SpectrumRequest(**_system_payload(config), grid=config.grid, include_shot=opts["include_shot"])
        )
    elif config.command is Command.DELTA_SPECTRUM:
        resp = handle_delta_spectrum(
            DeltaSpectrumRequest(
                **_system_payload(config), grid=config.grid, beta0=opts["beta0"], form=opts["form"]
            )
        )
    elif config.command is Command.BOUND:
        resp = handle_bound(
            BoundRequest(
                **_system_payload(config),
                omega=opts["omega"],
                criterion=opts["criterion"],
                target=opts["target"],
                form=opts["form"],
            )
        )
    elif config.command is Command.BOUND_CURVE:
        observed = None
        if opts["observed_path"] is not None:
            curve = ingest_observed(opts["observed_path"])
            observed = ObservedCurveModel(
                omega_rad_s=[float(w) for w in curve.omegas],
                psd_m2_per_hz=[float(v) for v in curve.values],
            )
        resp = handle_bound_curve(
            BoundCurveRequest(
                **_system_payload(config),
                grid=config.grid,
                observed=observed,
                criterion=opts["criterion"],
                target=opts["target"],
                form=opts["form"],
            )
        )
    elif config.command is Command.SWEEP:
        resp = handle_sweep(
            SweepRequest(
                **_system_payload(config),
                variable=opts["variable"],
                scales=list(opts["scales"]),
                grid=config.grid,
                criterion=opts["criterion"],
                target=opts["target"],
                side_of_resonance=opts["side"],
                form=opts["form"],
            )
        )
    elif config.command is Command.SQL:
        resp = handle_sql(SqlRequest(**_system_payload(config), numeric=opts["numeric"]))
    elif config.command is Command.TRANSLATE_LIGO:
        name = opts["name"] or ("aligo" if opts["input"] is None else Path(opts["input"]).stem)
        resp = handle_translate_ligo(
            TranslateLigoRequest(interferometer=_load_interferometer(opts["input"]), name=name)
        )
    elif config.command is Command.ORACLE:
        resp = handle_oracle(
            OracleRequest(
                **_system_payload(config),
                beta0=opts["beta0"],
                dt=opts["dt"],
                segments=opts["segments"],
                segment_periods=opts["segment_periods"],
                burn_in=opts["burn_in"],
                seed=opts["seed"],
                realizations=opts["realizations"],
                window=opts["window"],
            )
        )
    elif config.command is Command.PRESETS:
        resp = handle_presets()
    else:
        raise click.UsageError(f"unhandled command {config.command}")
    fmt = config.format or _DEFAULT_FORMAT[config.command]
    return emit(resp, fmt, path=config.output_path)


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        config = parse_args(argv)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 130
    try:
        text = run(config)
    except click.UsageError as exc:
        exc.show()
        return 2
    except (InputDataError, InvalidParameterError, ValidationError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except (RegimeValidityError, UnboundedBoundError, OracleError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 4
    except GupNoiseError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    if config.output_path is None:
        click.echo(text, nl=False)
    return 0
