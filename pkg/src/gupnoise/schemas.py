"""Request and response models for the HTTP service and the CLI.

The physics core stays in plain dataclasses; everything here only validates
payloads at the boundary and carries the resolved parameter set back out, so
each emitted artifact records exactly what was computed and with which
formula variant.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .model import (
    DampingKind,
    DampingModel,
    OpticalParams,
    OscillatorParams,
)

# Parameter names accepted by --override / "overrides". "gamma" is sugar for
# viscous Q = Omega/gamma and may not be combined with an explicit "Q".
OVERRIDE_KEYS = (
    "m",
    "Omega",
    "T",
    "Q",
    "gamma",
    "damping",
    "nu",
    "P",
    "L",
    "kappa",
    "eta2",
)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DampingInfo(StrictModel):
    kind: Literal["viscous", "structural"] = "viscous"
    Q: float = Field(gt=0)


class OscillatorModel(StrictModel):
    m: float = Field(gt=0)
    Omega: float = Field(gt=0)
    T: float = Field(ge=0)
    damping: DampingInfo


class OpticsModel(StrictModel):
    nu: float = Field(gt=0)
    P: float = Field(ge=0)
    L: float = Field(gt=0)
    kappa: float = Field(gt=0)
    eta2: float = Field(default=1.0, gt=0, le=1)


class SystemModel(StrictModel):
    """Resolved oscillator + optics pair embedded in every artifact."""

    oscillator: OscillatorModel
    optics: OpticsModel


def oscillator_to_core(model: OscillatorModel) -> OscillatorParams:
    return OscillatorParams(
        m=model.m,
        Omega=model.Omega,
        damping=DampingModel(DampingKind(model.damping.kind), model.damping.Q),
        T=model.T,
    )


def oscillator_from_core(params: OscillatorParams) -> OscillatorModel:
    return OscillatorModel(
        m=params.m,
        Omega=params.Omega,
        T=params.T,
        damping=DampingInfo(kind=params.damping.kind.value, Q=params.damping.Q),
    )


def optics_to_core(model: OpticsModel) -> OpticalParams:
    return OpticalParams(nu=model.nu, P=model.P, L=model.L, kappa=model.kappa, eta2=model.eta2)


def optics_from_core(params: OpticalParams) -> OpticsModel:
    return OpticsModel(nu=params.nu, P=params.P, L=params.L, kappa=params.kappa, eta2=params.eta2)


def system_from_core(osc: OscillatorParams, opt: OpticalParams) -> SystemModel:
    return SystemModel(oscillator=oscillator_from_core(osc), optics=optics_from_core(opt))


class GridModel(StrictModel):
    """Frequency grid in rad/s. Log spacing by default."""

    omega_min: float = Field(gt=0)
    omega_max: float = Field(gt=0)
    points: int = Field(ge=2)
    spacing: Literal["log", "linear"] = "log"

    @model_validator(mode="after")
    def _ordered(self) -> "GridModel":
        if not self.omega_min < self.omega_max:
            raise ValueError(f"omega_min must be below omega_max, got [{self.omega_min}, {self.omega_max}]")
        return self

    def to_array(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.omega_min, self.omega_max, self.points)
        return np.linspace(self.omega_min, self.omega_max, self.points)


class SystemRequest(StrictModel):
    """Base payload: a preset name or an explicit system, plus overrides.

    Overrides are applied after the preset (or explicit system) is loaded,
    and go through the same parameter validation as direct construction.
    """

    preset: Optional[str] = None
    oscillator: Optional[OscillatorModel] = None
    optics: Optional[OpticsModel] = None
    overrides: dict[str, float | str] = Field(default_factory=dict)


class SpectrumRequest(SystemRequest):
    grid: GridModel
    include_shot: bool = True


class DeltaSpectrumRequest(SystemRequest):
    grid: GridModel
    beta0: float = 1.0
    form: Literal["general", "adiabatic"] = "general"


class BoundRequest(SystemRequest):
    omega: float | Literal["resonance", "sql"]
    criterion: Literal["relative-noise", "fixed-target"] = "fixed-target"
    target: Optional[float] = Field(default=None, gt=0)
    form: Literal["general", "adiabatic"] = "general"


class ObservedCurveModel(StrictModel):
    omega_rad_s: list[float]
    psd_m2_per_hz: list[float]

    @model_validator(mode="after")
    def _aligned(self) -> "ObservedCurveModel":
        if len(self.omega_rad_s) != len(self.psd_m2_per_hz):
            raise ValueError("omega and psd arrays differ in length")
        if len(self.omega_rad_s) < 2:
            raise ValueError("observed curve needs at least two points")
        return self


class BoundCurveRequest(SystemRequest):
    grid: Optional[GridModel] = None
    criterion: Literal["relative-noise", "fixed-target"] = "relative-noise"
    observed: Optional[ObservedCurveModel] = None
    target: Optional[float] = Field(default=None, gt=0)
    form: Literal["general", "adiabatic"] = "general"


class SweepRequest(SystemRequest):
    variable: Literal["mass", "omega", "power", "kappa", "length", "q", "temperature"]
    scales: list[float] = Field(min_length=1)
    grid: Optional[GridModel] = None
    criterion: Literal["relative-noise", "fixed-target"] = "relative-noise"
    target: Optional[float] = Field(default=None, gt=0)
    side_of_resonance: bool = False
    form: Literal["general", "adiabatic"] = "general"


class SqlRequest(SystemRequest):
    numeric: bool = False


class TranslateLigoRequest(StrictModel):
    interferometer: dict[str, float]
    name: str = "ifo"


class OracleRequest(SystemRequest):
    """Monte-Carlo spectrum estimate. dt and burn_in default to the spec
    guards (resolution cap, ten damping times) when omitted."""

    beta0: float = Field(default=0.0, ge=0)
    dt: Optional[float] = Field(default=None, gt=0)
    segments: int = Field(default=12, ge=8)
    segment_periods: float = Field(default=40.0, ge=20.0)
    burn_in: Optional[float] = Field(default=None, ge=0)
    seed: int = Field(default=1, ge=0)
    realizations: int = Field(default=2, ge=1)
    window: Literal["hann", "rect"] = "hann"


class ResultMeta(StrictModel):
    params: SystemModel
    formula_variant: Optional[Literal["general", "adiabatic"]] = None
    damping_model: Literal["viscous", "structural"]
    artifact_version: str


class CurveResponse(StrictModel):
    kind: Literal["standard", "perturbation", "observed", "oracle"]
    omega_rad_s: list[float]
    psd_m2_per_hz: list[float]
    meta: ResultMeta


class BoundResponse(StrictModel):
    beta0_max: float
    beta_e_max: float
    omega_rad_s: float
    criterion: Literal["relative-noise", "fixed-target"]
    target_psd: float
    meta: ResultMeta


class BoundPointModel(StrictModel):
    omega_rad_s: float
    beta0_max: float
    beta_e_max: float
    target_psd: float


class BoundCurveResponse(StrictModel):
    points: list[BoundPointModel]
    headline: BoundPointModel
    criterion: Literal["relative-noise", "fixed-target"]
    meta: ResultMeta


class SweepPointModel(StrictModel):
    scale: float
    omega_rad_s: Optional[float]
    beta0_max: Optional[float]
    beta_e_max: Optional[float]
    warning: Optional[str] = None


class SweepResponse(StrictModel):
    variable: str
    points: list[SweepPointModel]
    criterion: Literal["relative-noise", "fixed-target"]
    meta: ResultMeta


class SqlResponse(StrictModel):
    omega_sql_rad_s: float
    omega_argmin_rad_s: Optional[float] = None
    meta: ResultMeta


class TranslateLigoResponse(StrictModel):
    name: str
    system: SystemModel
    note: str
    max_rel_dev_radiation: Optional[float]
    max_rel_dev_shot: Optional[float]
    meta: ResultMeta


class OracleResponse(StrictModel):
    omega_rad_s: list[float]
    psd_m2_per_hz: list[float]
    stderr: list[float]
    n_segments: int
    dt: float
    duration: float
    burn_in: float
    seed: int
    realizations: int
    beta0: float
    window: str
    meta: ResultMeta


class PresetModel(StrictModel):
    name: str
    system: SystemModel
    note: str = ""


class PresetsResponse(StrictModel):
    presets: list[PresetModel]
    artifact_version: str
