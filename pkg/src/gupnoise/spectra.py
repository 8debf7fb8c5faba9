"""Displacement-noise spectra of a driven oscillator, standard and perturbed.

The oscillator obeys x' = p/m + (4A/3m) p^3, p' = -m Omega^2 x - gamma m x' + f
with f the sum of white thermal force (intensity 2 k_B T gamma m) and the
radiation pressure force, an Ornstein-Uhlenbeck process with variance
hbar^2 G^2 alpha^2 and correlation rate kappa/2. A is the quadratic
commutator-modification coefficient; everything here is first order in A.

Two evaluation routes are kept deliberately separate and cross-checked in the
tests:

* perturbed_spectrum_general: the full first-order spectrum, valid whenever
  kappa >> gamma and the oscillator is underdamped. Its coefficient set
  carries the cavity response exactly.
* perturbed_spectrum_adiabatic plus the regime_* closed forms: the kappa ->
  infinity (white radiation noise) limit at fixed effective temperature.

The general assembly reduces to the adiabatic one exactly when the optical
coefficients vanish; do not merge the two routes.

Conventions: omega in rad/s, spectra are the symmetrised two-sided PSD in
m^2/Hz, so integrating S dω/2π over the whole real line gives the variance.
All spectrum functions accept scalar or array omega.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .errors import InvalidParameterError, RegimeValidityError, RegimeWarning
from .model import (
    DampingKind,
    GupModel,
    OpticalParams,
    OscillatorParams,
    derived_optics,
)

_SQRT3 = math.sqrt(3.0)


class TemperatureForm(enum.Enum):
    ADIABATIC = "adiabatic"
    EXACT = "exact"


class SideVariant(enum.Enum):
    # omega = Omega +/- gamma0: ratio of perturbation to mechanical noise is maximal
    RATIO_MAX = "ratio-max"
    # omega = Omega +/- gamma0/sqrt(3): |classical perturbation| is maximal
    MAGNITUDE_MAX = "magnitude-max"


def gamma_at(osc: OscillatorParams, omega):
    """Damping rate at probe frequency omega.

    Viscous: gamma = Omega/Q independent of omega. Structural: constant loss
    angle, gamma(omega) = Omega^2/(Q omega); diverges toward zero frequency,
    so omega = 0 is rejected for structural damping.
    """
    omega = np.asarray(omega, dtype=float)
    gamma_ref = osc.gamma_reference()
    if osc.damping.kind is DampingKind.VISCOUS:
        out = np.broadcast_to(gamma_ref, omega.shape).copy() if omega.shape else gamma_ref
        return out
    if np.any(omega == 0.0):
        raise InvalidParameterError("structural damping rate diverges at omega = 0")
    return osc.Omega**2 / (osc.damping.Q * np.abs(omega))


@dataclass(frozen=True)
class Eigenpair:
    """Decay rate and oscillation frequency of the underdamped mechanical
    mode: lambda_pm = -gamma0 +/- i omega0 with gamma0 = gamma/2 and
    omega0 = sqrt(4 Omega^2 - gamma^2)/2, so gamma0^2 + omega0^2 = Omega^2."""

    gamma0: np.ndarray | float
    omega0: np.ndarray | float


def eigenpair(osc: OscillatorParams, omega=None) -> Eigenpair:
    """Eigenpair at probe frequency omega (only structural damping actually
    depends on it; omega=None evaluates at resonance)."""
    gamma = gamma_at(osc, osc.Omega if omega is None else omega)
    if np.any(np.asarray(gamma) >= 2.0 * osc.Omega):
        raise InvalidParameterError(
            "oscillator must be underdamped (gamma < 2 Omega) for the spectral decomposition"
        )
    return Eigenpair(gamma0=gamma / 2.0, omega0=np.sqrt(4.0 * osc.Omega**2 - gamma**2) / 2.0)


def kb_t_prime(osc: OscillatorParams, opt: OpticalParams, form: TemperatureForm = TemperatureForm.ADIABATIC) -> float:
    """Effective bath energy k_B T' (J) combining thermal and radiation drive.

    Adiabatic form: k_B T + 8 h nu F^2 P / (pi^2 c^2 gamma m), the white-noise
    limit of the radiation contribution. Exact form: k_B T + m Omega^2 <x0^2>_rad
    using the exact steady variance of the oscillator under the OU radiation
    force. Both use gamma at resonance; the effective temperature is a single
    scalar per parameter set, not a function of probe frequency.
    """
    kbt = CONSTANTS.k_B * osc.T
    if opt.P == 0.0:
        return kbt
    gamma = osc.gamma_reference()
    d = derived_optics(opt)
    if form is TemperatureForm.ADIABATIC:
        rad = 8.0 * CONSTANTS.h * opt.nu * d.finesse**2 * opt.P / (math.pi**2 * CONSTANTS.c**2 * gamma * osc.m)
    else:
        ep = eigenpair(osc)
        g0, w0 = float(ep.gamma0), float(ep.omega0)
        h2a2g2 = CONSTANTS.hbar**2 * d.alpha_sq * d.G**2
        rad = h2a2g2 * (opt.kappa + 4.0 * g0) / (g0 * osc.m * ((opt.kappa + 2.0 * g0) ** 2 + 4.0 * w0**2))
    return kbt + rad


def standard_spectrum(osc: OscillatorParams, opt: OpticalParams, omega, include_shot: bool = True):
    """Unperturbed displacement PSD: thermal + radiation pressure (+ shot).

    S = 2 gamma k_B T / (m D) + 4 hbar^2 alpha^2 G^2 / (kappa zeta m^2 D)
        + kappa zeta / (16 alpha^2 G^2 eta2)
    with D = gamma^2 omega^2 + (omega^2 - Omega^2)^2 and zeta = 1 + 4 omega^2
    / kappa^2. The shot floor is referred through the detection efficiency
    eta2 and needs a nonzero drive.
    """
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    om = np.atleast_1d(omega)
    gamma = np.asarray(gamma_at(osc, om), dtype=float)
    w2 = om**2
    det = (gamma * om) ** 2 + (w2 - osc.Omega**2) ** 2
    s = 2.0 * gamma * CONSTANTS.k_B * osc.T / (osc.m * det)
    if opt.P > 0.0:
        d = derived_optics(opt)
        a2g2 = d.alpha_sq * d.G**2
        zeta = 1.0 + 4.0 * w2 / opt.kappa**2
        s = s + 4.0 * CONSTANTS.hbar**2 * a2g2 / (opt.kappa * zeta * osc.m**2 * det)
        if include_shot:
            s = s + opt.kappa * zeta / (16.0 * a2g2 * opt.eta2)
    elif include_shot:
        raise InvalidParameterError("shot noise requires a nonzero drive power")
    return float(s[0]) if scalar else s


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of the first-order correlation-function perturbation.

    The perturbed correlator (tau >= 0, up to the overall prefactor
    A <x0^2> (gamma0^2+omega0^2)/omega0^2) reads

        e^{(-3 gamma0 + 3 i omega0) tau} W
      + e^{(-gamma0 - i omega0) tau} (I1 + I2 + (J1 + J2) i)
      - tau e^{(-gamma0 - i omega0) tau} (M + N i)
      + e^{(-kappa/2 + 2 i omega0) tau} (Y + Z i)
      + e^{(-2 gamma0 - kappa/2) tau} R  + c.c.

    I1/J1, W, Y/Z, R carry the cavity response; I2/J2 come from the
    zero-point energy of the oscillator; M/N weight the secular tau term.
    """

    W: np.ndarray | float
    I1: np.ndarray | float
    J1: np.ndarray | float
    I2: np.ndarray | float
    J2: np.ndarray | float
    M: np.ndarray | float
    N: np.ndarray | float
    Y: np.ndarray | float
    Z: np.ndarray | float
    R: np.ndarray | float
    eigen: Eigenpair
    kb_t_prime: float


def coefficient_set(
    osc: OscillatorParams,
    opt: OpticalParams | None,
    kb_t_prime_value: float,
    omega=None,
    adiabatic: bool = False,
) -> CoefficientSet:
    """Coefficient set at effective bath energy kb_t_prime_value.

    omega fixes the damping rate entering the eigenpair; it only matters for
    structural damping (the published coefficient expressions are written for
    viscous oscillators, the structural case substitutes gamma(omega)
    throughout). With adiabatic=True, or opt=None/P=0, the optical
    coefficients vanish and J1 keeps only its secular-matching part.
    """
    if kb_t_prime_value <= 0.0:
        raise InvalidParameterError("effective bath energy must be positive")
    ep = eigenpair(osc, omega)
    g0 = np.asarray(ep.gamma0, dtype=float)
    w0 = np.asarray(ep.omega0, dtype=float)
    theta = kb_t_prime_value * osc.m  # k_B m T', recurring weight
    hbar2 = CONSTANTS.hbar**2

    I2 = hbar2 * w0**2 * osc.m / (6.0 * kb_t_prime_value)
    J2 = -hbar2 * w0 * g0 * osc.m / (6.0 * kb_t_prime_value)
    M = g0 * theta
    N = theta * w0
    J1_secular = theta * g0 / w0

    if adiabatic or opt is None or opt.P == 0.0:
        zero = np.zeros_like(g0 + w0)
        return CoefficientSet(
            W=zero, I1=zero, J1=J1_secular + zero, I2=I2, J2=J2,
            M=M, N=N, Y=zero, Z=zero, R=zero, eigen=ep, kb_t_prime=kb_t_prime_value,
        )

    d = derived_optics(opt)
    h2a2g2 = hbar2 * d.alpha_sq * d.G**2
    kap = opt.kappa
    u = g0**2 + 4.0 * w0**2
    c2 = kap**2 + 4.0 * w0**2
    c6 = kap**2 + 36.0 * w0**2

    W = -3.0 * h2a2g2 * w0**2 / (u * c2)
    I1 = 39.0 * h2a2g2 * w0**2 * kap**4 / (u * c2**2 * c6)
    J1 = J1_secular - (
        8.0 * h2a2g2 * w0 * kap * (5.0 * kap**2 + 18.0 * w0**2) * (g0**2 + 3.0 * w0**2)
        / (u * c2**2 * c6)
    )
    Y = 16.0 * h2a2g2 * kap * (g0 * kap**4 + 6.0 * kap**3 * w0**2 + 88.0 * kap * w0**4) / (c2**3 * c6)
    Z = -16.0 * h2a2g2 * kap * w0 * (kap**4 + 12.0 * kap**2 * w0**2 - 96.0 * w0**4) / (c2**3 * c6)
    R = -16.0 * h2a2g2 * kap**2 * (g0 * kap + 2.0 * w0**2) / c2**3
    return CoefficientSet(W=W, I1=I1, J1=J1, I2=I2, J2=J2, M=M, N=N, Y=Y, Z=Z, R=R, eigen=ep, kb_t_prime=kb_t_prime_value)


def _assemble(cs: CoefficientSet, kappa: float, A: float, m: float, omega: np.ndarray, omega_res_sq: float) -> np.ndarray:
    """Fourier transform of the perturbed correlator: the five Lorentzian-like
    blocks, summed with Neumaier compensation since they can cancel to many
    digits near sign changes of the total."""
    g0 = np.asarray(cs.eigen.gamma0, dtype=float)
    w0 = np.asarray(cs.eigen.omega0, dtype=float)
    w2 = omega**2
    # gamma0^2 + omega0^2 = Omega^2 exactly; recomputing it from the rounded
    # eigenpair shifts the (u2 - omega^2) root off resonance by ~Omega^2 eps,
    # which the secular block amplifies by Q^2
    u2 = omega_res_sq
    v = g0**2 - w0**2

    # denominators as sums of squares; expanded forms lose all structure at
    # high Q through (omega^2 - Omega^2)-type cancellation
    d1 = (w2 + v) ** 2 + 4.0 * g0**2 * w0**2
    It = cs.I1 + cs.I2
    Jt = cs.J1 + cs.J2
    b1 = (w2 * (Jt * w0 - g0 * It) - u2 * (g0 * It + Jt * w0)) / d1

    # secular (tau-weighted) block; the numerator polynomial is evaluated in
    # its factored form, pulling out (u2 - omega^2): the expanded cubic in
    # omega^2 cancels catastrophically near resonance at high Q
    q_quartic = (
        cs.M * w2**2
        + 2.0 * g0 * (cs.M * g0 + 3.0 * cs.N * w0) * w2
        + cs.M * (u2 * v - 8.0 * g0**2 * w0**2)
        + 2.0 * g0 * cs.N * w0 * (5.0 * g0**2 + w0**2)
    )
    b2 = ((u2 - w2) * q_quartic + 8.0 * g0**2 * w0 * u2 * (cs.M * w0 - cs.N * g0)) / d1**2

    b3 = 2.0 * cs.R * kappa / (kappa**2 + 4.0 * w2)

    d4 = (w2 + 3.0 * v) ** 2 + 36.0 * (g0**2 + 2.0 * w0**2) * (2.0 * g0**2 + w0**2)
    b4 = 3.0 * cs.W * g0 * (w2 + 9.0 * g0**2 + 9.0 * w0**2) / d4

    q = kappa / 2.0
    d5 = (w2 + q**2 - 4.0 * w0**2) ** 2 + 4.0 * kappa**2 * w0**2
    b5 = (w2 * (-cs.Y * q - 2.0 * w0 * cs.Z) - (q**2 + 4.0 * w0**2) * (cs.Y * q - 2.0 * w0 * cs.Z)) / d5

    total = np.zeros_like(w2 + g0)
    comp = np.zeros_like(total)
    for term in (b1, b2, -b3, -b4, b5):
        term = np.broadcast_to(term, total.shape)
        t = total + term
        comp += np.where(np.abs(total) >= np.abs(term), (total - t) + term, (term - t) + total)
        total = t
    bracket = total + comp
    return (-4.0 * A * cs.kb_t_prime / (m * np.asarray(cs.eigen.omega0, dtype=float) ** 2)) * bracket


def perturbed_spectrum_general(
    osc: OscillatorParams,
    opt: OpticalParams,
    gup: GupModel,
    omega,
    kb_t_prime_value: float | None = None,
):
    """First-order spectrum perturbation deltaS(omega), full cavity response.

    Valid for underdamped oscillators with kappa >> gamma; emits a
    RegimeWarning when kappa < 10 gamma. The effective bath energy defaults
    to the adiabatic k_B T'.
    """
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    om = np.atleast_1d(omega).astype(float)
    if kb_t_prime_value is None:
        kb_t_prime_value = kb_t_prime(osc, opt)
    gamma_max = float(np.max(np.asarray(gamma_at(osc, om))))
    if opt.kappa < 10.0 * gamma_max:
        warnings.warn(
            "general perturbed spectrum assumes kappa >> gamma; "
            f"kappa/gamma = {opt.kappa / gamma_max:.3g}",
            RegimeWarning,
            stacklevel=2,
        )
    cs = coefficient_set(osc, opt, kb_t_prime_value, omega=om)
    out = _assemble(cs, opt.kappa, gup.A, osc.m, om, osc.Omega**2)
    return float(out[0]) if scalar else out


def perturbed_spectrum_adiabatic(
    osc: OscillatorParams,
    opt: OpticalParams | None,
    gup: GupModel,
    omega,
    kb_t_prime_value: float | None = None,
):
    """White-radiation-noise limit of the perturbation:

    deltaS = 16 A gamma k_B^2 T'^2 omega^2 (omega^2 - Omega^2) / D^2
             + 2 A gamma omega^2 hbar^2 / (3 D)

    with D = gamma^2 omega^2 + (omega^2 - Omega^2)^2 and gamma = gamma(omega).
    """
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    om = np.atleast_1d(omega).astype(float)
    if kb_t_prime_value is None:
        if opt is None:
            kb_t_prime_value = CONSTANTS.k_B * osc.T
        else:
            kb_t_prime_value = kb_t_prime(osc, opt)
    gamma = np.asarray(gamma_at(osc, om), dtype=float)
    w2 = om**2
    det = (gamma * om) ** 2 + (w2 - osc.Omega**2) ** 2
    a = gup.A
    classical = 16.0 * a * gamma * kb_t_prime_value**2 * w2 * (w2 - osc.Omega**2) / det**2
    zero_point = 2.0 * a * gamma * w2 * CONSTANTS.hbar**2 / (3.0 * det)
    out = classical + zero_point
    return float(out[0]) if scalar else out


def regime_resonance(osc: OscillatorParams, gup: GupModel) -> float:
    """deltaS(Omega) = 2 A hbar^2 / (3 gamma): at resonance only the
    zero-point part survives at first order."""
    return 2.0 * gup.A * CONSTANTS.hbar**2 / (3.0 * osc.gamma_reference())


def regime_side(
    osc: OscillatorParams,
    opt: OpticalParams | None,
    gup: GupModel,
    sign: int = 1,
    variant: SideVariant = SideVariant.RATIO_MAX,
    kb_t_prime_value: float | None = None,
) -> tuple[float, float]:
    """Perturbation just off resonance; returns (omega, deltaS).

    RATIO_MAX sits at Omega +/- gamma0 where the perturbation relative to the
    mechanical noise peaks; MAGNITUDE_MAX at Omega +/- gamma0/sqrt(3) where
    its absolute value peaks. High-Q closed forms, so Q >= 10 is required.
    """
    if sign not in (1, -1):
        raise InvalidParameterError("sign must be +1 or -1")
    if osc.damping.Q < 10.0:
        raise RegimeValidityError(
            f"side-of-resonance closed forms assume high Q, got Q = {osc.damping.Q}"
        )
    if kb_t_prime_value is None:
        kb_t_prime_value = CONSTANTS.k_B * osc.T if opt is None else kb_t_prime(osc, opt)
    gamma = osc.gamma_reference()
    gamma0 = gamma / 2.0
    t_ratio_sq = (kb_t_prime_value / (CONSTANTS.hbar * osc.Omega)) ** 2
    q_factor = osc.Omega / gamma
    base = gup.A * CONSTANTS.hbar**2 / gamma
    if variant is SideVariant.RATIO_MAX:
        omega = osc.Omega + sign * gamma0
        value = sign * base * (4.0 * t_ratio_sq * q_factor + 1.0 / 3.0)
    else:
        omega = osc.Omega + sign * gamma0 / _SQRT3
        value = sign * base * (3.0 * _SQRT3 * t_ratio_sq * q_factor + 0.5)
    return omega, value


def regime_free_mass(
    osc: OscillatorParams,
    opt: OpticalParams | None,
    gup: GupModel,
    omega,
    kb_t_prime_value: float | None = None,
):
    """Free-mass limit omega >> Omega:

    deltaS = (2 A gamma hbar^2 / omega^2) [8 (k_B T'/hbar Omega)^2
             (Omega/omega)^2 + 1/3],  gamma = gamma(omega).

    Errors below omega = 10 Omega where the expansion is unjustified.
    """
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    om = np.atleast_1d(omega).astype(float)
    if np.any(om < 10.0 * osc.Omega):
        raise RegimeValidityError("free-mass formula requires omega >= 10 Omega")
    if kb_t_prime_value is None:
        kb_t_prime_value = CONSTANTS.k_B * osc.T if opt is None else kb_t_prime(osc, opt)
    gamma = np.asarray(gamma_at(osc, om), dtype=float)
    t_ratio_sq = (kb_t_prime_value / (CONSTANTS.hbar * osc.Omega)) ** 2
    out = (2.0 * gup.A * gamma * CONSTANTS.hbar**2 / om**2) * (
        8.0 * t_ratio_sq * (osc.Omega / om) ** 2 + 1.0 / 3.0
    )
    return float(out[0]) if scalar else out


def regime_low_frequency(
    osc: OscillatorParams,
    opt: OpticalParams | None,
    gup: GupModel,
    omega,
    kb_t_prime_value: float | None = None,
):
    """Low-frequency window 10 Omega/Q <= omega <= Omega/10:

    deltaS = (2 A hbar^2 gamma omega^2 / Omega^4) [-8 (k_B T'/hbar Omega)^2
             + 1/3],  gamma = gamma(omega).
    """
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    om = np.atleast_1d(omega).astype(float)
    lo = 10.0 * osc.Omega / osc.damping.Q
    hi = osc.Omega / 10.0
    if np.any((om < lo) | (om > hi)):
        raise RegimeValidityError(
            f"low-frequency formula requires omega in [{lo:.6g}, {hi:.6g}] rad/s"
        )
    if kb_t_prime_value is None:
        kb_t_prime_value = CONSTANTS.k_B * osc.T if opt is None else kb_t_prime(osc, opt)
    gamma = np.asarray(gamma_at(osc, om), dtype=float)
    t_ratio_sq = (kb_t_prime_value / (CONSTANTS.hbar * osc.Omega)) ** 2
    out = (2.0 * gup.A * CONSTANTS.hbar**2 * gamma * om**2 / osc.Omega**4) * (
        -8.0 * t_ratio_sq + 1.0 / 3.0
    )
    return float(out[0]) if scalar else out


def validity_flags(osc: OscillatorParams, opt: OpticalParams | None, omega) -> dict:
    """Machine-readable regime indicators for the given evaluation band."""
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    gamma = np.asarray(gamma_at(osc, om), dtype=float)
    gamma_max = float(np.max(gamma))
    flags = {
        "underdamped": bool(gamma_max < 2.0 * osc.Omega),
        "high_q": bool(osc.damping.Q >= 10.0),
    }
    if opt is not None and opt.P > 0.0:
        flags["kappa_dominates_gamma"] = bool(opt.kappa >= 10.0 * gamma_max)
        flags["adiabatic_band"] = bool(
            opt.kappa >= 10.0 * max(osc.Omega, gamma_max) and float(np.max(om)) <= opt.kappa / 10.0
        )
    return flags
