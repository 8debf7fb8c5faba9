"""Reading observed spectra and writing result artifacts.

Artifacts are deterministic: floats are written with repr (shortest
round-trip form), JSON keys are sorted, and CSV rows follow the input order,
so re-running the same request yields byte-identical files. Every artifact
carries the resolved parameters, formula variant, damping model and version,
either inline (JSON) or in leading comment lines (CSV).

Non-finite floats become the strings "inf", "-inf" and "nan" in JSON so the
output stays strictly parseable; CSV cells use repr directly.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from . import __version__
from .errors import InputDataError, InvalidParameterError
from .model import CurveKind, SpectrumCurve
from .schemas import (
    BoundCurveResponse,
    BoundResponse,
    CurveResponse,
    OracleResponse,
    PresetsResponse,
    SqlResponse,
    SweepResponse,
    TranslateLigoResponse,
)


class OutputFormat(enum.Enum):
    CSV = "csv"
    JSON = "json"


_OMEGA_HEADERS = {"omega_rad_s": 1.0, "freq_hz": 2.0 * math.pi}
_PSD_HEADER = "psd_m2_per_hz"


def _read_rows_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InputDataError(f"{path} contains no data")
    reader = csv.reader(lines)
    header = [cell.strip().lower() for cell in next(reader)]
    return header, [row for row in reader]


def _observed_from_arrays(omegas, psd, path) -> SpectrumCurve:
    om = np.asarray(omegas, dtype=float)
    ps = np.asarray(psd, dtype=float)
    if om.size == 0:
        raise InputDataError(f"{path} contains no data rows")
    if om.size != ps.size:
        raise InputDataError(f"{path}: frequency and PSD columns differ in length")
    if np.any(~np.isfinite(om)) or np.any(om <= 0):
        raise InputDataError(f"{path}: frequencies must be positive and finite")
    if np.any(~np.isfinite(ps)) or np.any(ps <= 0):
        raise InputDataError(f"{path}: PSD values must be positive and finite")
    order = np.argsort(om, kind="stable")
    om, ps = om[order], ps[order]
    # average rows that repeat a frequency exactly
    uniq, inverse = np.unique(om, return_inverse=True)
    if uniq.size != om.size:
        sums = np.bincount(inverse, weights=ps)
        counts = np.bincount(inverse)
        om, ps = uniq, sums / counts
    return SpectrumCurve(omegas=om, values=ps, kind=CurveKind.OBSERVED)


def _ingest_csv(path: Path) -> SpectrumCurve:
    header, rows = _read_rows_csv(path)
    omega_col = next((i for i, h in enumerate(header) if h in _OMEGA_HEADERS), None)
    psd_col = next((i for i, h in enumerate(header) if h == _PSD_HEADER), None)
    if omega_col is None or psd_col is None:
        raise InputDataError(
            f"{path}: header must name an 'omega_rad_s' or 'freq_hz' column and "
            f"a '{_PSD_HEADER}' column, got {header}"
        )
    factor = _OMEGA_HEADERS[header[omega_col]]
    omegas, psd = [], []
    for n, row in enumerate(rows, start=2):
        if len(row) <= max(omega_col, psd_col):
            raise InputDataError(f"{path}: line {n} has too few columns")
        try:
            omegas.append(float(row[omega_col]) * factor)
            psd.append(float(row[psd_col]))
        except ValueError:
            raise InputDataError(f"{path}: non-numeric value on line {n}: {row!r}") from None
    return _observed_from_arrays(omegas, psd, path)


def _ingest_json(path: Path) -> SpectrumCurve:
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputDataError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise InputDataError(f"{path}: expected an object with frequency and PSD arrays")
    key = next((k for k in _OMEGA_HEADERS if k in payload), None)
    if key is None or _PSD_HEADER not in payload:
        raise InputDataError(
            f"{path}: object must hold 'omega_rad_s' or 'freq_hz' plus '{_PSD_HEADER}'"
        )
    try:
        omegas = [float(v) * _OMEGA_HEADERS[key] for v in payload[key]]
        psd = [float(v) for v in payload[_PSD_HEADER]]
    except (TypeError, ValueError):
        raise InputDataError(f"{path}: frequency and PSD arrays must be numeric") from None
    return _observed_from_arrays(omegas, psd, path)


def ingest_observed(path, fmt: OutputFormat | None = None) -> SpectrumCurve:
    """Load a measured displacement PSD.

    CSV needs a header with omega_rad_s (rad/s) or freq_hz (Hz, converted by
    2 pi on ingest) plus psd_m2_per_hz; '#' lines are comments. JSON uses the
    same keys as arrays. Rows are sorted by frequency and exact duplicate
    frequencies are averaged.
    """
    p = Path(path)
    if fmt is None:
        fmt = OutputFormat.JSON if p.suffix.lower() == ".json" else OutputFormat.CSV
    return _ingest_json(p) if fmt is OutputFormat.JSON else _ingest_csv(p)


def _jsonable(value):
    if isinstance(value, float):
        if math.isfinite(value):
            return value
        if value == math.inf:
            return "inf"
        return "-inf" if value == -math.inf else "nan"
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(meta: dict, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# gupnoise-artifact v{__version__}\n")
    buf.write("# meta: " + json.dumps(_jsonable(meta), sort_keys=True, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _meta_dict(resp: BaseModel, exclude: tuple[str, ...]) -> dict:
    dump = resp.model_dump(mode="python")
    return {k: v for k, v in dump.items() if k not in exclude}


def _csv_curve(resp: CurveResponse) -> str:
    rows = [[w, v, resp.kind] for w, v in zip(resp.omega_rad_s, resp.psd_m2_per_hz)]
    meta = _meta_dict(resp, ("omega_rad_s", "psd_m2_per_hz"))
    return _csv_text(meta, ["omega_rad_s", "psd_m2_per_hz", "kind"], rows)


def _csv_oracle(resp: OracleResponse) -> str:
    rows = [
        [w, v, s]
        for w, v, s in zip(resp.omega_rad_s, resp.psd_m2_per_hz, resp.stderr)
    ]
    meta = _meta_dict(resp, ("omega_rad_s", "psd_m2_per_hz", "stderr"))
    return _csv_text(meta, ["omega_rad_s", "psd_m2_per_hz", "stderr"], rows)


def _csv_bound_curve(resp: BoundCurveResponse) -> str:
    rows = [[p.omega_rad_s, p.beta0_max, p.beta_e_max, p.target_psd] for p in resp.points]
    meta = _meta_dict(resp, ("points",))
    return _csv_text(meta, ["omega_rad_s", "beta0_max", "beta_e_max", "target_psd"], rows)


def _csv_sweep(resp: SweepResponse) -> str:
    rows = [
        [p.scale, p.omega_rad_s, p.beta0_max, p.beta_e_max, p.warning]
        for p in resp.points
    ]
    meta = _meta_dict(resp, ("points",))
    return _csv_text(meta, ["scale", "omega_rad_s", "beta0_max", "beta_e_max", "warning"], rows)


def _csv_bound(resp: BoundResponse) -> str:
    rows = [[resp.beta0_max, resp.beta_e_max, resp.omega_rad_s, resp.criterion, resp.target_psd]]
    meta = _meta_dict(resp, ())
    return _csv_text(meta, ["beta0_max", "beta_e_max", "omega_rad_s", "criterion", "target_psd"], rows)


def _csv_sql(resp: SqlResponse) -> str:
    rows = [[resp.omega_sql_rad_s, resp.omega_argmin_rad_s]]
    return _csv_text(_meta_dict(resp, ()), ["omega_sql_rad_s", "omega_argmin_rad_s"], rows)


def _system_row(system) -> list:
    o, p = system.oscillator, system.optics
    return [o.m, o.Omega, o.damping.kind, o.damping.Q, o.T, p.nu, p.P, p.L, p.kappa, p.eta2]


_SYSTEM_HEADER = ["m", "Omega", "damping", "Q", "T", "nu", "P", "L", "kappa", "eta2"]


def _csv_translate(resp: TranslateLigoResponse) -> str:
    rows = [
        [resp.name]
        + _system_row(resp.system)
        + [resp.max_rel_dev_radiation, resp.max_rel_dev_shot]
    ]
    meta = _meta_dict(resp, ("system",))
    header = ["name"] + _SYSTEM_HEADER + ["max_rel_dev_radiation", "max_rel_dev_shot"]
    return _csv_text(meta, header, rows)


def _csv_presets(resp: PresetsResponse) -> str:
    rows = [[p.name] + _system_row(p.system) + [p.note] for p in resp.presets]
    meta = {"artifact_version": resp.artifact_version}
    return _csv_text(meta, ["name"] + _SYSTEM_HEADER + ["note"], rows)


_CSV_WRITERS = {
    CurveResponse: _csv_curve,
    OracleResponse: _csv_oracle,
    BoundCurveResponse: _csv_bound_curve,
    SweepResponse: _csv_sweep,
    BoundResponse: _csv_bound,
    SqlResponse: _csv_sql,
    TranslateLigoResponse: _csv_translate,
    PresetsResponse: _csv_presets,
}


def emit(resp: BaseModel, fmt: OutputFormat = OutputFormat.JSON, path=None) -> str:
    """Serialize a response model; optionally also write it to path."""
    if fmt is OutputFormat.JSON:
        text = json.dumps(_jsonable(resp.model_dump(mode="python")), sort_keys=True, indent=2) + "\n"
    else:
        writer = _CSV_WRITERS.get(type(resp))
        if writer is None:
            raise InvalidParameterError(f"no CSV form for {type(resp).__name__}")
        text = writer(resp)
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise InputDataError(f"cannot write {path}: {exc}") from None
    return text
