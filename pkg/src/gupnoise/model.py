"""Parameter containers and published experiment presets.

Everything here is a plain frozen dataclass: the core never mutates a
parameter set, sweeps build rescaled copies via dataclasses.replace. Angular
frequencies (Omega, kappa, spectrum grids) are rad/s throughout; the laser
frequency nu is the only plain-Hz quantity. Derived optical quantities
(coupling, photon number, finesse) are recomputed on demand and never stored,
so a rescaled parameter set can never carry a stale cache.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .errors import InvalidParameterError


class DampingKind(enum.Enum):
    VISCOUS = "viscous"
    STRUCTURAL = "structural"


class CurveKind(enum.Enum):
    STANDARD = "standard"
    PERTURBATION = "perturbation"
    OBSERVED = "observed"


class BoundCriterion(enum.Enum):
    RELATIVE_NOISE = "relative-noise"
    FIXED_TARGET = "fixed-target"


@dataclass(frozen=True)
class DampingModel:
    """Mechanical damping model.

    Viscous damping is frequency independent, gamma = Omega/Q. Structural
    damping keeps the loss angle constant instead, gamma(omega) = Omega^2 /
    (Q omega), which matters for suspended-mirror systems probed far below
    resonance.
    """

    kind: DampingKind = DampingKind.VISCOUS
    Q: float = 1.0e3

    def __post_init__(self) -> None:
        if not (self.Q > 0 and math.isfinite(self.Q)):
            raise InvalidParameterError(f"quality factor must be positive and finite, got {self.Q}")


@dataclass(frozen=True)
class OscillatorParams:
    """Mechanical oscillator: mass (kg), resonance Omega (rad/s), damping
    model, bath temperature T (K)."""

    m: float
    Omega: float
    damping: DampingModel
    T: float

    def __post_init__(self) -> None:
        if not (self.m > 0 and math.isfinite(self.m)):
            raise InvalidParameterError(f"mass must be positive, got {self.m}")
        if not (self.Omega > 0 and math.isfinite(self.Omega)):
            raise InvalidParameterError(f"resonance frequency must be positive, got {self.Omega}")
        if not (self.T >= 0 and math.isfinite(self.T)):
            raise InvalidParameterError(f"temperature must be non-negative, got {self.T}")

    def gamma_reference(self) -> float:
        """Damping rate evaluated at resonance, Omega/Q for both models."""
        return self.Omega / self.damping.Q


@dataclass(frozen=True)
class OpticalParams:
    """Drive and cavity: laser frequency nu (Hz), input power P (W), cavity
    length L (m), amplitude decay rate kappa (rad/s), detection efficiency
    eta2 entering the shot-noise floor."""

    nu: float
    P: float
    L: float
    kappa: float
    eta2: float = 1.0

    def __post_init__(self) -> None:
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise InvalidParameterError(f"laser frequency must be positive, got {self.nu}")
        if not (self.P >= 0 and math.isfinite(self.P)):
            raise InvalidParameterError(f"power must be non-negative, got {self.P}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise InvalidParameterError(f"cavity length must be positive, got {self.L}")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise InvalidParameterError(f"cavity decay rate must be positive, got {self.kappa}")
        if not (0 < self.eta2 <= 1):
            raise InvalidParameterError(f"detection efficiency must lie in (0, 1], got {self.eta2}")


@dataclass(frozen=True)
class DerivedOptics:
    """Quantities derived from OpticalParams; see derived_optics()."""

    G: float          # optomechanical coupling 2*pi*nu/L, rad/(s m)
    alpha_sq: float   # steady intracavity photon number 4P/(kappa hbar 2 pi nu)
    finesse: float    # pi c / (kappa L)


def derived_optics(opt: OpticalParams) -> DerivedOptics:
    two_pi_nu = 2.0 * math.pi * opt.nu
    return DerivedOptics(
        G=two_pi_nu / opt.L,
        alpha_sq=4.0 * opt.P / (opt.kappa * CONSTANTS.hbar * two_pi_nu),
        finesse=math.pi * CONSTANTS.c / (opt.kappa * opt.L),
    )


@dataclass(frozen=True)
class GupModel:
    """Modified-commutator strength.

    beta0 parametrises [x, p] = i hbar (1 + beta0 (p / M_P c)^2); the raw
    quadratic coefficient A = beta0 / (M_P c)^2 multiplies p^2 directly.
    """

    beta0: float = 1.0

    def __post_init__(self) -> None:
        if not (self.beta0 >= 0 and math.isfinite(self.beta0)):
            raise InvalidParameterError(f"beta0 must be non-negative, got {self.beta0}")

    @property
    def A(self) -> float:
        return self.beta0 / CONSTANTS.planck_momentum**2


@dataclass(frozen=True)
class SpectrumCurve:
    """A sampled displacement PSD: omegas in rad/s, values in m^2/Hz
    (two-sided symmetric convention, integral dω/2π gives the variance)."""

    omegas: np.ndarray
    values: np.ndarray
    kind: CurveKind

    def __post_init__(self) -> None:
        omegas = np.asarray(self.omegas, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)
        if omegas.ndim != 1 or omegas.shape != values.shape:
            raise InvalidParameterError("curve arrays must be 1-d and of equal length")
        if omegas.size and not np.all(np.isfinite(omegas)):
            raise InvalidParameterError("curve frequencies must be finite")


@dataclass(frozen=True)
class BoundResult:
    """An upper bound on the commutator parameters at one frequency."""

    beta0_max: float
    beta_e_max: float
    omega: float
    criterion: BoundCriterion
    target_psd: float


@dataclass(frozen=True)
class Preset:
    name: str
    oscillator: OscillatorParams
    optics: OpticalParams
    note: str = ""


def _viscous(m, Omega, gamma, T):
    # published sets quote gamma at resonance; store Q = Omega/gamma so
    # gamma_at(Omega) round-trips exactly
    return OscillatorParams(m=m, Omega=Omega, damping=DampingModel(DampingKind.VISCOUS, Omega / gamma), T=T)


_PRESETS = {
    "purdy2013": Preset(
        name="purdy2013",
        oscillator=_viscous(m=7.00e-12, Omega=9.75e6, gamma=8.98e3, T=1.7e-3),
        optics=OpticalParams(nu=2.82e14, P=9.40e-5, L=5.10e-3, kappa=5.59e6, eta2=1.0),
        note="membrane-in-the-middle experiment with observed radiation pressure noise",
    ),
    "teufel2016": Preset(
        name="teufel2016",
        oscillator=_viscous(m=8.50e-14, Omega=5.88e7, gamma=1.53e2, T=4.00e-2),
        optics=OpticalParams(nu=6.71e9, P=7.80e-9, L=4.00e-8, kappa=6.64e7, eta2=1.0),
        note="microwave drum resonator dominated by radiation pressure noise",
    ),
    "murch2008": Preset(
        name="murch2008",
        oscillator=_viscous(m=1.0e-22, Omega=2.0 * math.pi * 4.2e4, gamma=2.0 * math.pi * 1.0e3, T=0.8e-6),
        optics=OpticalParams(nu=3.84e14, P=5.02e-13, L=1.94e-4, kappa=2.0 * math.pi * 6.6e5, eta2=1.0),
        note="ultracold atomic gas in a driven cavity (Q=42)",
    ),
    "aligo": Preset(
        name="aligo",
        oscillator=OscillatorParams(
            m=10.0,
            Omega=4.15,
            damping=DampingModel(DampingKind.STRUCTURAL, 1.33e9),
            T=300.0,
        ),
        optics=OpticalParams(nu=2.82e14, P=3.60e3, L=4.00e3, kappa=4.78e3, eta2=0.75 / 4.0),
        note="single-cavity equivalent of the dual-recycled interferometer; "
        "published tables also quote gamma ~ 1e-6 at resonance for orientation, "
        "the structural model with Q=1.33e9 is authoritative",
    ),
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset(name: str) -> Preset:
    try:
        return _PRESETS[name]
    except KeyError:
        known = ", ".join(PRESET_NAMES)
        raise InvalidParameterError(f"unknown preset {name!r}; known presets: {known}") from None


def beta_e_from_beta0(beta0: float, m: float) -> float:
    """Composite scaling: a centre-of-mass bound beta0 on an oscillator of
    mass m implies beta_e = 9 beta0 (m / m_nucleon)^2 for its constituent
    nucleons."""
    if m <= 0:
        raise InvalidParameterError(f"mass must be positive, got {m}")
    return 9.0 * beta0 * (m / CONSTANTS.m_nucleon) ** 2
