"""HTTP service and the handler functions behind it.

Each handler is a pure function from a request model to a response model;
the FastAPI app and the CLI both call the same handlers, so there is exactly
one resolution path from user input to physics. Domain errors map to 400
(bad input) or 409 (regime or solvability violations); schema violations get
FastAPI's native 422.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .bounds import (
    SpectrumForm,
    SweepSpec,
    SweepVariable,
    beta_bound_at,
    beta_bound_curve,
    headline_bound,
    omega_sql,
    omega_sql_numeric,
    sweep,
)
from .errors import (
    GupNoiseError,
    InputDataError,
    InvalidParameterError,
    OracleError,
    RegimeValidityError,
    UnboundedBoundError,
)
from .ligo import (
    interferometer_from_mapping,
    radiation_noise_equivalence_check,
    translate,
)
from .model import (
    BoundCriterion,
    CurveKind,
    DampingKind,
    DampingModel,
    GupModel,
    OpticalParams,
    OscillatorParams,
    PRESET_NAMES,
    SpectrumCurve,
    preset,
)
from .oracle import SimulationSpec, Window, estimate_psd
from .schemas import (
    OVERRIDE_KEYS,
    BoundCurveRequest,
    BoundCurveResponse,
    BoundPointModel,
    BoundRequest,
    BoundResponse,
    CurveResponse,
    DeltaSpectrumRequest,
    OracleRequest,
    OracleResponse,
    PresetModel,
    PresetsResponse,
    ResultMeta,
    SpectrumRequest,
    SqlRequest,
    SqlResponse,
    SweepRequest,
    SweepResponse,
    SystemRequest,
    TranslateLigoRequest,
    TranslateLigoResponse,
    optics_to_core,
    oscillator_to_core,
    system_from_core,
)
from .spectra import (
    perturbed_spectrum_adiabatic,
    perturbed_spectrum_general,
    standard_spectrum,
)


def _as_number(key: str, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"override {key} must be a number, got {value!r}") from None


def apply_overrides(
    osc: OscillatorParams, opt: OpticalParams, overrides: dict
) -> tuple[OscillatorParams, OpticalParams]:
    """Rebuild the system with selected parameters replaced.

    Validation runs through the normal constructors, so a bad value fails
    exactly like direct construction would. "gamma" is viscous shorthand for
    Q = Omega/gamma, evaluated after any Omega override.
    """
    unknown = sorted(set(overrides) - set(OVERRIDE_KEYS))
    if unknown:
        raise InvalidParameterError(
            f"unknown override parameter(s): {', '.join(unknown)}; "
            f"known: {', '.join(OVERRIDE_KEYS)}"
        )
    if "Q" in overrides and "gamma" in overrides:
        raise InvalidParameterError("give either Q or gamma, not both")

    omega_new = _as_number("Omega", overrides["Omega"]) if "Omega" in overrides else osc.Omega
    kind_raw = overrides.get("damping", osc.damping.kind.value)
    try:
        kind = DampingKind(kind_raw)
    except ValueError:
        raise InvalidParameterError(
            f"damping must be 'viscous' or 'structural', got {kind_raw!r}"
        ) from None
    if "Q" in overrides:
        q_new = _as_number("Q", overrides["Q"])
    elif "gamma" in overrides:
        gamma = _as_number("gamma", overrides["gamma"])
        if not gamma > 0:
            raise InvalidParameterError(f"gamma must be positive, got {gamma}")
        q_new = omega_new / gamma
    else:
        q_new = osc.damping.Q

    osc_new = OscillatorParams(
        m=_as_number("m", overrides["m"]) if "m" in overrides else osc.m,
        Omega=omega_new,
        damping=DampingModel(kind, q_new),
        T=_as_number("T", overrides["T"]) if "T" in overrides else osc.T,
    )
    opt_new = OpticalParams(
        nu=_as_number("nu", overrides["nu"]) if "nu" in overrides else opt.nu,
        P=_as_number("P", overrides["P"]) if "P" in overrides else opt.P,
        L=_as_number("L", overrides["L"]) if "L" in overrides else opt.L,
        kappa=_as_number("kappa", overrides["kappa"]) if "kappa" in overrides else opt.kappa,
        eta2=_as_number("eta2", overrides["eta2"]) if "eta2" in overrides else opt.eta2,
    )
    return osc_new, opt_new


def resolve_system(req: SystemRequest) -> tuple[OscillatorParams, OpticalParams]:
    if req.preset is not None:
        if req.oscillator is not None or req.optics is not None:
            raise InvalidParameterError("give a preset or an explicit system, not both")
        p = preset(req.preset)
        osc, opt = p.oscillator, p.optics
    elif req.oscillator is not None and req.optics is not None:
        osc, opt = oscillator_to_core(req.oscillator), optics_to_core(req.optics)
    else:
        raise InvalidParameterError(
            "a preset name or an explicit oscillator+optics pair is required"
        )
    if req.overrides:
        osc, opt = apply_overrides(osc, opt, req.overrides)
    return osc, opt


def _meta(osc: OscillatorParams, opt: OpticalParams, form: str | None = None) -> ResultMeta:
    return ResultMeta(
        params=system_from_core(osc, opt),
        formula_variant=form,
        damping_model=osc.damping.kind.value,
        artifact_version=__version__,
    )


def handle_spectrum(req: SpectrumRequest) -> CurveResponse:
    osc, opt = resolve_system(req)
    grid = req.grid.to_array()
    values = standard_spectrum(osc, opt, grid, include_shot=req.include_shot)
    return CurveResponse(
        kind=CurveKind.STANDARD.value,
        omega_rad_s=[float(w) for w in grid],
        psd_m2_per_hz=[float(v) for v in values],
        meta=_meta(osc, opt),
    )


def handle_delta_spectrum(req: DeltaSpectrumRequest) -> CurveResponse:
    osc, opt = resolve_system(req)
    grid = req.grid.to_array()
    gup = GupModel(beta0=req.beta0)
    if req.form == "general":
        values = perturbed_spectrum_general(osc, opt, gup, grid)
    else:
        values = perturbed_spectrum_adiabatic(osc, opt, gup, grid)
    return CurveResponse(
        kind=CurveKind.PERTURBATION.value,
        omega_rad_s=[float(w) for w in grid],
        psd_m2_per_hz=[float(v) for v in values],
        meta=_meta(osc, opt, form=req.form),
    )


def _resolve_omega(osc: OscillatorParams, opt: OpticalParams, omega) -> float:
    if omega == "resonance":
        return osc.Omega
    if omega == "sql":
        return omega_sql(osc, opt)
    return float(omega)


def handle_bound(req: BoundRequest) -> BoundResponse:
    osc, opt = resolve_system(req)
    omega = _resolve_omega(osc, opt, req.omega)
    criterion = BoundCriterion(req.criterion)
    if criterion is BoundCriterion.RELATIVE_NOISE:
        target = float(standard_spectrum(osc, opt, omega))
    elif req.target is not None:
        target = req.target
    else:
        target = float(standard_spectrum(osc, opt, omega_sql(osc, opt)))
    form = SpectrumForm.GENERAL if req.form == "general" else SpectrumForm.ADIABATIC
    result = beta_bound_at(osc, opt, omega, target, spectrum_form=form, criterion=criterion)
    return BoundResponse(
        beta0_max=result.beta0_max,
        beta_e_max=result.beta_e_max,
        omega_rad_s=result.omega,
        criterion=result.criterion.value,
        target_psd=result.target_psd,
        meta=_meta(osc, opt, form=req.form),
    )


def handle_bound_curve(req: BoundCurveRequest) -> BoundCurveResponse:
    osc, opt = resolve_system(req)
    if req.grid is not None:
        grid = req.grid.to_array()
    elif req.observed is not None:
        grid = np.asarray(req.observed.omega_rad_s, dtype=float)
    else:
        raise InvalidParameterError("bound-curve needs a frequency grid or an observed spectrum")
    observed = None
    if req.observed is not None:
        observed = SpectrumCurve(
            omegas=np.asarray(req.observed.omega_rad_s, dtype=float),
            values=np.asarray(req.observed.psd_m2_per_hz, dtype=float),
            kind=CurveKind.OBSERVED,
        )
    form = SpectrumForm.GENERAL if req.form == "general" else SpectrumForm.ADIABATIC
    results = beta_bound_curve(
        osc,
        opt,
        grid,
        criterion=BoundCriterion(req.criterion),
        observed=observed,
        target=req.target,
        spectrum_form=form,
    )
    best = headline_bound(results)

    def as_point(r):
        return BoundPointModel(
            omega_rad_s=r.omega,
            beta0_max=r.beta0_max,
            beta_e_max=r.beta_e_max,
            target_psd=r.target_psd,
        )

    return BoundCurveResponse(
        points=[as_point(r) for r in results],
        headline=as_point(best),
        criterion=req.criterion,
        meta=_meta(osc, opt, form=req.form),
    )


def handle_sweep(req: SweepRequest) -> SweepResponse:
    osc, opt = resolve_system(req)
    if req.grid is None and not req.side_of_resonance:
        raise InvalidParameterError(
            "a frequency grid is required unless side_of_resonance is set"
        )
    spec = SweepSpec(
        variable=SweepVariable(req.variable),
        scale_factors=tuple(req.scales),
        frequency_grid=tuple(req.grid.to_array()) if req.grid is not None else (),
        criterion=BoundCriterion(req.criterion),
        target=req.target,
        side_of_resonance=req.side_of_resonance,
        spectrum_form=SpectrumForm.GENERAL if req.form == "general" else SpectrumForm.ADIABATIC,
    )
    points = sweep(osc, opt, spec)
    out = []
    for pt in points:
        out.append(
            {
                "scale": pt.scale,
                "omega_rad_s": pt.best_omega,
                "beta0_max": pt.bound.beta0_max if pt.bound is not None else None,
                "beta_e_max": pt.bound.beta_e_max if pt.bound is not None else None,
                "warning": pt.warning,
            }
        )
    return SweepResponse(
        variable=req.variable,
        points=out,
        criterion=req.criterion,
        meta=_meta(osc, opt, form=req.form),
    )


def handle_sql(req: SqlRequest) -> SqlResponse:
    osc, opt = resolve_system(req)
    argmin = omega_sql_numeric(osc, opt) if req.numeric else None
    return SqlResponse(
        omega_sql_rad_s=omega_sql(osc, opt),
        omega_argmin_rad_s=argmin,
        meta=_meta(osc, opt),
    )


def handle_translate_ligo(req: TranslateLigoRequest) -> TranslateLigoResponse:
    ifo = interferometer_from_mapping(req.interferometer)
    osc, opt = translate(ifo)
    note = f"single-cavity equivalent of interferometer {req.name!r}"
    try:
        report = radiation_noise_equivalence_check(ifo, (osc, opt))
        dev_rp, dev_shot = report.max_rel_dev_radiation, report.max_rel_dev_shot
    except RegimeValidityError:
        # Default check band sits below the pendulum resonance for this
        # geometry; the translation itself is still valid.
        dev_rp, dev_shot = None, None
    return TranslateLigoResponse(
        name=req.name,
        system=system_from_core(osc, opt),
        note=note,
        max_rel_dev_radiation=dev_rp,
        max_rel_dev_shot=dev_shot,
        meta=_meta(osc, opt),
    )


def handle_oracle(req: OracleRequest) -> OracleResponse:
    osc, opt = resolve_system(req)
    gamma = osc.gamma_reference()
    dt_cap = min(2.0 * math.pi / osc.Omega, 2.0 / opt.kappa, 1.0 / gamma) / 50.0
    dt = req.dt if req.dt is not None else 0.999 * dt_cap
    burn_in = req.burn_in if req.burn_in is not None else 10.0 / gamma
    # snap the segment to a whole number of steps so duration divides into
    # exactly req.segments segments after sample-count rounding
    wanted = req.segment_periods * 2.0 * math.pi / osc.Omega
    n_per = math.ceil(wanted / dt)
    if n_per * dt < wanted:
        n_per += 1
    segment_length = n_per * dt
    spec = SimulationSpec(
        osc=osc,
        opt=opt,
        A=GupModel(beta0=req.beta0).A,
        dt=dt,
        duration=req.segments * segment_length,
        burn_in=burn_in,
        seed=req.seed,
        n_realizations=req.realizations,
    )
    est = estimate_psd(spec, segment_length=segment_length, window=Window(req.window))
    return OracleResponse(
        omega_rad_s=[float(w) for w in est.omegas],
        psd_m2_per_hz=[float(v) for v in est.mean_psd],
        stderr=[float(v) for v in est.stderr],
        n_segments=est.n_segments,
        dt=spec.dt,
        duration=spec.duration,
        burn_in=spec.burn_in,
        seed=spec.seed,
        realizations=spec.n_realizations,
        beta0=req.beta0,
        window=req.window,
        meta=_meta(osc, opt),
    )


def handle_presets() -> PresetsResponse:
    items = []
    for name in PRESET_NAMES:
        p = preset(name)
        items.append(
            PresetModel(
                name=p.name,
                system=system_from_core(p.oscillator, p.optics),
                note=p.note,
            )
        )
    return PresetsResponse(presets=items, artifact_version=__version__)


_STATUS = {
    InputDataError: 400,
    InvalidParameterError: 400,
    RegimeValidityError: 409,
    UnboundedBoundError: 409,
    OracleError: 409,
}


def create_app() -> FastAPI:
    app = FastAPI(title="gupnoise", version=__version__)

    @app.exception_handler(GupNoiseError)
    async def _domain_error(request: Request, exc: GupNoiseError) -> JSONResponse:
        status = next(
            (code for cls, code in _STATUS.items() if isinstance(exc, cls)), 400
        )
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.post("/spectrum", response_model=CurveResponse)
    def spectrum(req: SpectrumRequest) -> CurveResponse:
        return handle_spectrum(req)

    @app.post("/delta-spectrum", response_model=CurveResponse)
    def delta_spectrum(req: DeltaSpectrumRequest) -> CurveResponse:
        return handle_delta_spectrum(req)

    @app.post("/bound", response_model=BoundResponse)
    def bound(req: BoundRequest) -> BoundResponse:
        return handle_bound(req)

    @app.post("/bound-curve", response_model=BoundCurveResponse)
    def bound_curve(req: BoundCurveRequest) -> BoundCurveResponse:
        return handle_bound_curve(req)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep_endpoint(req: SweepRequest) -> SweepResponse:
        return handle_sweep(req)

    @app.post("/sql", response_model=SqlResponse)
    def sql(req: SqlRequest) -> SqlResponse:
        return handle_sql(req)

    @app.post("/translate-ligo", response_model=TranslateLigoResponse)
    def translate_ligo(req: TranslateLigoRequest) -> TranslateLigoResponse:
        return handle_translate_ligo(req)

    @app.post("/oracle", response_model=OracleResponse)
    def oracle(req: OracleRequest) -> OracleResponse:
        return handle_oracle(req)

    @app.get("/presets", response_model=PresetsResponse)
    def presets() -> PresetsResponse:
        return handle_presets()

    return app


app = create_app()
