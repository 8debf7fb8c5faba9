"""Turning spectra into upper bounds on the commutator parameters.

The experimental criterion is conservative: the extra noise must not exceed a
reference level, |deltaS(omega)| <= S_ref(omega). Since deltaS is exactly
linear in beta0, beta0_max = S_ref / |deltaS(beta0=1)| pointwise; no fitting,
no statistics. Two criteria are supported: RELATIVE_NOISE compares against
the system's own standard spectrum (or a user-supplied observed curve),
FIXED_TARGET against a single PSD level, defaulting to the standard spectrum
at the SQL frequency.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .errors import (
    GupNoiseError,
    InputDataError,
    InvalidParameterError,
    RegimeValidityError,
    RegimeWarning,
    UnboundedBoundError,
)
from .model import (
    BoundCriterion,
    BoundResult,
    GupModel,
    OpticalParams,
    OscillatorParams,
    SpectrumCurve,
    beta_e_from_beta0,
    derived_optics,
)
from .spectra import (
    TemperatureForm,
    eigenpair,
    kb_t_prime,
    perturbed_spectrum_adiabatic,
    perturbed_spectrum_general,
    standard_spectrum,
)

__all__ = [
    "SpectrumForm",
    "NoiseRegime",
    "SweepVariable",
    "SweepSpec",
    "SweepPoint",
    "effective_temperature",
    "steady_variances",
    "omega_sql",
    "omega_sql_numeric",
    "beta_bound_at",
    "beta_bound_curve",
    "headline_bound",
    "beta_e_from_beta0",
    "relative_noise",
    "driven_bound",
    "sweep",
]


class SpectrumForm(enum.Enum):
    GENERAL = "general"
    ADIABATIC = "adiabatic"


class NoiseRegime(enum.Enum):
    FREE_MASS = "free-mass"
    RESONANCE = "resonance"
    SIDE = "side"


class SweepVariable(enum.Enum):
    MASS = "mass"
    OMEGA = "omega"
    POWER = "power"
    KAPPA = "kappa"
    LENGTH = "length"
    Q = "q"
    TEMPERATURE = "temperature"


def effective_temperature(
    osc: OscillatorParams, opt: OpticalParams, form: TemperatureForm = TemperatureForm.ADIABATIC
) -> float:
    """Effective bath energy k_B T' in joules; see spectra.kb_t_prime."""
    return kb_t_prime(osc, opt, form)


def steady_variances(osc: OscillatorParams, opt: OpticalParams | None) -> tuple[float, float]:
    """Steady-state (<x^2>, <p^2>) of the unperturbed driven oscillator.

    Thermal parts are exact equipartition values; the radiation parts are the
    closed forms for an OU force of variance hbar^2 G^2 alpha^2 and
    correlation rate kappa/2 acting on the underdamped mode.
    """
    kbt = CONSTANTS.k_B * osc.T
    x_var = kbt / (osc.m * osc.Omega**2)
    p_var = osc.m * kbt
    if opt is not None and opt.P > 0.0:
        ep = eigenpair(osc)
        g0, w0 = float(np.asarray(ep.gamma0)), float(np.asarray(ep.omega0))
        d = derived_optics(opt)
        h2a2g2 = CONSTANTS.hbar**2 * d.alpha_sq * d.G**2
        den = (opt.kappa + 2.0 * g0) ** 2 + 4.0 * w0**2
        x_var += h2a2g2 * (opt.kappa + 4.0 * g0) / (g0 * osc.m**2 * osc.Omega**2 * den)
        p_var += h2a2g2 * opt.kappa / (g0 * den)
    return x_var, p_var


def omega_sql(osc: OscillatorParams, opt: OpticalParams) -> float:
    """Frequency of the standard-quantum-limit crossover, where falling
    mechanical noise meets rising shot noise. Closed form; reduces to Omega
    at P = 0."""
    # written as 8 Omega^2 + drive/(sqrt(b^2+drive)+b) rather than the raw
    # -kappa^2 + sqrt(...) + 4 Omega^2, which loses the P -> 0 limit to
    # cancellation when kappa >> Omega
    b = opt.kappa**2 + 4.0 * osc.Omega**2
    drive = 1024.0 * math.pi * opt.nu * opt.P / (opt.L**2 * osc.m)
    s = 8.0 * osc.Omega**2
    if drive > 0.0:
        s += drive / (math.sqrt(b**2 + drive) + b)
    return math.sqrt(s / 8.0)


def omega_sql_numeric(osc: OscillatorParams, opt: OpticalParams, grid=None) -> float:
    """Grid argmin of the full standard spectrum (shot included). Diagnostic
    companion to the approximate closed form."""
    if grid is None:
        hint = omega_sql(osc, opt)
        grid = np.geomspace(osc.Omega, 100.0 * max(hint, osc.Omega), 4000)
    grid = np.asarray(grid, dtype=float)
    s = standard_spectrum(osc, opt, grid)
    return float(grid[np.argmin(s)])


def _delta_unit(osc, opt, omega, spectrum_form, kb_t_prime_value=None):
    gup1 = GupModel(beta0=1.0)
    if spectrum_form is SpectrumForm.GENERAL:
        return perturbed_spectrum_general(osc, opt, gup1, omega, kb_t_prime_value=kb_t_prime_value)
    return perturbed_spectrum_adiabatic(osc, opt, gup1, omega, kb_t_prime_value=kb_t_prime_value)


def beta_bound_at(
    osc: OscillatorParams,
    opt: OpticalParams,
    omega: float,
    target_psd: float,
    spectrum_form: SpectrumForm = SpectrumForm.GENERAL,
    criterion: BoundCriterion = BoundCriterion.FIXED_TARGET,
) -> BoundResult:
    """Upper bound beta0_max = target_psd / |deltaS(beta0=1, omega)|.

    The magnitude is compared because the perturbation is negative below
    resonance. A vanishing perturbation cannot bound anything and raises
    UnboundedBoundError rather than returning infinity.
    """
    if target_psd < 0:
        raise InvalidParameterError(f"target PSD must be non-negative, got {target_psd}")
    ds = _delta_unit(osc, opt, float(omega), spectrum_form)
    if target_psd == 0.0:
        beta0 = 0.0
    elif ds == 0.0:
        raise UnboundedBoundError(
            f"perturbation vanishes at omega = {omega:.6g} rad/s; no bound can be set there"
        )
    else:
        beta0 = target_psd / abs(ds)
    return BoundResult(
        beta0_max=beta0,
        beta_e_max=beta_e_from_beta0(beta0, osc.m),
        omega=float(omega),
        criterion=criterion,
        target_psd=float(target_psd),
    )


def _observed_interpolator(observed: SpectrumCurve):
    om = np.asarray(observed.omegas, dtype=float)
    val = np.asarray(observed.values, dtype=float)
    if om.size < 2:
        raise InputDataError("observed spectrum needs at least two points for interpolation")
    order = np.argsort(om)
    om, val = om[order], val[order]
    if np.any(om <= 0) or np.any(val <= 0):
        raise InputDataError("observed spectrum must have positive frequencies and PSD values")
    log_om, log_val = np.log(om), np.log(val)

    def interp(target_omega: np.ndarray) -> np.ndarray:
        t = np.asarray(target_omega, dtype=float)
        if np.any(t < om[0]) or np.any(t > om[-1]):
            raise InputDataError(
                f"requested frequencies outside the observed range [{om[0]:.6g}, {om[-1]:.6g}] rad/s"
            )
        return np.exp(np.interp(np.log(t), log_om, log_val))

    return interp


def beta_bound_curve(
    osc: OscillatorParams,
    opt: OpticalParams,
    grid,
    criterion: BoundCriterion = BoundCriterion.RELATIVE_NOISE,
    observed: SpectrumCurve | None = None,
    target: float | None = None,
    spectrum_form: SpectrumForm = SpectrumForm.GENERAL,
) -> list[BoundResult]:
    """Per-frequency bounds over a grid.

    RELATIVE_NOISE targets the observed curve when given (log-log
    interpolated, error outside its range), otherwise the system's own
    standard spectrum with shot noise. FIXED_TARGET uses the scalar `target`,
    defaulting to the standard spectrum at the SQL frequency. Points where
    the perturbation vanishes are reported with an infinite bound rather than
    dropped, so the output grid always matches the input.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise InvalidParameterError("frequency grid must not be empty")
    if criterion is BoundCriterion.RELATIVE_NOISE:
        if observed is not None:
            targets = _observed_interpolator(observed)(grid)
        else:
            targets = np.asarray(standard_spectrum(osc, opt, grid), dtype=float)
    else:
        if target is None:
            target = standard_spectrum(osc, opt, omega_sql(osc, opt))
        if target <= 0:
            raise InvalidParameterError(f"fixed target PSD must be positive, got {target}")
        targets = np.full(grid.shape, float(target))

    kbtp = kb_t_prime(osc, opt)
    ds = np.atleast_1d(_delta_unit(osc, opt, grid, spectrum_form, kb_t_prime_value=kbtp))
    results = []
    for om, t, d in zip(grid, targets, ds):
        beta0 = t / abs(d) if d != 0.0 else math.inf
        results.append(
            BoundResult(
                beta0_max=float(beta0),
                beta_e_max=beta_e_from_beta0(beta0, osc.m) if math.isfinite(beta0) else math.inf,
                omega=float(om),
                criterion=criterion,
                target_psd=float(t),
            )
        )
    return results


def headline_bound(results: list[BoundResult]) -> BoundResult:
    """Minimum finite bound over a curve; the number an experiment quotes."""
    finite = [r for r in results if math.isfinite(r.beta0_max)]
    if not finite:
        raise UnboundedBoundError("no finite bound anywhere on the grid")
    return min(finite, key=lambda r: r.beta0_max)


def relative_noise(
    osc: OscillatorParams,
    opt: OpticalParams,
    gup: GupModel,
    omega: float,
    regime: NoiseRegime,
) -> float:
    """Closed-form deltaS/S against the mechanical (thermal + radiation)
    noise at effective temperature T'.

    FREE_MASS: beta0 m/(M_P c)^2 (8 k_B T' + hbar^2 omega^2 / 3 k_B T'),
    for omega >= 10 Omega. RESONANCE: beta0 hbar^2 Omega^2 m /
    (3 (M_P c)^2 k_B T'). SIDE: +/- beta0 4 m Omega k_B T' / (gamma (M_P c)^2),
    sign following which side of resonance omega lies on.
    """
    kbtp = kb_t_prime(osc, opt)
    mpc2 = CONSTANTS.planck_momentum**2
    if regime is NoiseRegime.FREE_MASS:
        if omega < 10.0 * osc.Omega:
            raise RegimeValidityError("free-mass relative noise requires omega >= 10 Omega")
        return gup.beta0 * osc.m / mpc2 * (8.0 * kbtp + CONSTANTS.hbar**2 * omega**2 / (3.0 * kbtp))
    if regime is NoiseRegime.RESONANCE:
        return gup.beta0 * CONSTANTS.hbar**2 * osc.Omega**2 * osc.m / (3.0 * mpc2 * kbtp)
    if osc.damping.Q < 10.0:
        raise RegimeValidityError(
            f"side-of-resonance relative noise assumes high Q, got Q = {osc.damping.Q}"
        )
    sign = 1.0 if omega >= osc.Omega else -1.0
    return sign * gup.beta0 * 4.0 * osc.m * osc.Omega * kbtp / (osc.gamma_reference() * mpc2)


def driven_bound(
    m: float, v_sq: float, omega: float, regime: NoiseRegime, Q: float | None = None
) -> float:
    """Order-of-magnitude beta0 bound for a classically driven oscillator of
    mean-square velocity v_sq whose noise floor saturates the perturbation.

    FREE_MASS: (M_P c)^2 / (8 m^2 v_sq + hbar^2 omega^2 / (2 v_sq)).
    SIDE: (M_P c)^2 / (4 Q m^2 v_sq), requires Q.
    """
    if m <= 0 or v_sq <= 0:
        raise InvalidParameterError("mass and mean-square velocity must be positive")
    mpc2 = CONSTANTS.planck_momentum**2
    if regime is NoiseRegime.FREE_MASS:
        return mpc2 / (8.0 * m**2 * v_sq + CONSTANTS.hbar**2 * omega**2 / (2.0 * v_sq))
    if regime is NoiseRegime.SIDE:
        if Q is None:
            raise InvalidParameterError("side-of-resonance driven bound requires Q")
        return mpc2 / (4.0 * Q * m**2 * v_sq)
    raise InvalidParameterError(f"driven bound is defined for FreeMass and Side, not {regime}")


@dataclass(frozen=True)
class SweepSpec:
    """One-variable rescaling study.

    Omega sweeps hold Q constant (gamma follows Omega); kappa sweeps hold L
    constant and vice versa, so the finesse changes. side_of_resonance=True
    evaluates each rescaled system at its own Omega + gamma(Omega)/2 instead
    of the fixed frequency grid, matching how near-resonance bounds are
    usually quoted; frequency_grid may then be empty.
    """

    variable: SweepVariable
    scale_factors: tuple
    frequency_grid: tuple = ()
    criterion: BoundCriterion = BoundCriterion.RELATIVE_NOISE
    target: float | None = None
    side_of_resonance: bool = False
    spectrum_form: SpectrumForm = SpectrumForm.GENERAL

    def __post_init__(self) -> None:
        scales = tuple(float(s) for s in self.scale_factors)
        object.__setattr__(self, "scale_factors", scales)
        object.__setattr__(self, "frequency_grid", tuple(float(f) for f in self.frequency_grid))
        if not scales or any(s <= 0 or not math.isfinite(s) for s in scales):
            raise InvalidParameterError("scale factors must be positive and finite")
        if not self.side_of_resonance and not self.frequency_grid:
            raise InvalidParameterError("frequency grid required unless side_of_resonance is set")


@dataclass(frozen=True)
class SweepPoint:
    scale: float
    best_omega: float | None
    bound: BoundResult | None
    warning: str | None = None


def _rescaled(osc: OscillatorParams, opt: OpticalParams, variable: SweepVariable, scale: float):
    if variable is SweepVariable.MASS:
        return dataclasses.replace(osc, m=osc.m * scale), opt
    if variable is SweepVariable.OMEGA:
        return dataclasses.replace(osc, Omega=osc.Omega * scale), opt
    if variable is SweepVariable.POWER:
        return osc, dataclasses.replace(opt, P=opt.P * scale)
    if variable is SweepVariable.KAPPA:
        return osc, dataclasses.replace(opt, kappa=opt.kappa * scale)
    if variable is SweepVariable.LENGTH:
        return osc, dataclasses.replace(opt, L=opt.L * scale)
    if variable is SweepVariable.Q:
        damping = dataclasses.replace(osc.damping, Q=osc.damping.Q * scale)
        return dataclasses.replace(osc, damping=damping), opt
    if variable is SweepVariable.TEMPERATURE:
        return dataclasses.replace(osc, T=osc.T * scale), opt
    raise InvalidParameterError(f"unknown sweep variable {variable}")


def _sweep_point(osc, opt, spec: SweepSpec, scale: float) -> SweepPoint:
    try:
        osc_s, opt_s = _rescaled(osc, opt, spec.variable, scale)
        grid = (
            (osc_s.Omega + osc_s.gamma_reference() / 2.0,)
            if spec.side_of_resonance
            else spec.frequency_grid
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            results = beta_bound_curve(
                osc_s,
                opt_s,
                grid,
                criterion=spec.criterion,
                target=spec.target,
                spectrum_form=spec.spectrum_form,
            )
            best = headline_bound(results)
    except GupNoiseError as exc:
        return SweepPoint(scale=scale, best_omega=None, bound=None, warning=str(exc))
    return SweepPoint(scale=scale, best_omega=best.omega, bound=best)


def sweep(osc: OscillatorParams, opt: OpticalParams, spec: SweepSpec) -> list[SweepPoint]:
    """Rescale one variable over spec.scale_factors and report the best bound
    per scale. Points are independent; GUPNOISE_THREADS > 1 evaluates them in
    a thread pool. Output order always follows scale_factors."""
    try:
        n_threads = int(os.environ.get("GUPNOISE_THREADS", "1"))
    except ValueError:
        n_threads = 1
    work = [(scale,) for scale in spec.scale_factors]
    if n_threads > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            return list(pool.map(lambda args: _sweep_point(osc, opt, spec, *args), work))
    return [_sweep_point(osc, opt, spec, scale) for (scale,) in work]
