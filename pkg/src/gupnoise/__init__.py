"""Noise spectra and commutator-deformation bounds for driven oscillators."""

from .constants import CONSTANTS, PhysicalConstants
from .errors import (
    GupNoiseError,
    InputDataError,
    InvalidParameterError,
    OracleError,
    RegimeValidityError,
    RegimeWarning,
    UnboundedBoundError,
)
from .model import (
    BoundCriterion,
    BoundResult,
    CurveKind,
    DampingKind,
    DampingModel,
    DerivedOptics,
    GupModel,
    OpticalParams,
    OscillatorParams,
    Preset,
    PRESET_NAMES,
    SpectrumCurve,
    beta_e_from_beta0,
    derived_optics,
    preset,
)
from .spectra import (
    CoefficientSet,
    Eigenpair,
    SideVariant,
    TemperatureForm,
    coefficient_set,
    eigenpair,
    gamma_at,
    kb_t_prime,
    perturbed_spectrum_adiabatic,
    perturbed_spectrum_general,
    regime_free_mass,
    regime_low_frequency,
    regime_resonance,
    regime_side,
    standard_spectrum,
    validity_flags,
)
from .bounds import (
    NoiseRegime,
    SpectrumForm,
    SweepPoint,
    SweepSpec,
    SweepVariable,
    beta_bound_at,
    beta_bound_curve,
    driven_bound,
    effective_temperature,
    headline_bound,
    omega_sql,
    omega_sql_numeric,
    relative_noise,
    steady_variances,
    sweep,
)
from .ligo import (
    ALIGO_IFO,
    EquivalenceReport,
    InterferometerParams,
    interferometer_from_mapping,
    radiation_noise_equivalence_check,
    translate,
    translate_to_preset,
)
from .oracle import (
    DeltaComparison,
    PsdEstimate,
    SimulationSpec,
    Trajectory,
    Window,
    classical_delta_curve,
    compare_delta,
    estimate_psd,
    read_trajectory,
    simulate,
    write_trajectory,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
