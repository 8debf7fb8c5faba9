"""Brute-force Langevin oracle for the analytic spectra.

Everything else in this package manipulates closed-form expressions. This
module instead integrates the classical nonlinear equations of motion

    x' = p/m + 4 A p^3 / (3 m)
    p' = -m Omega^2 x - gamma m x' + f_T + f_rad

with white thermal force (intensity 2 gamma m k_B T) and an
Ornstein-Uhlenbeck radiation force (stationary variance hbar^2 G^2 alpha^2,
correlation rate kappa/2), and estimates displacement PSDs from the sampled
paths. Agreement with the analytic engine is then a genuine cross-check, not
a restatement: the two share no formulas beyond the equations of motion.

The simulation is classical. hbar enters only through the radiation-force
magnitude, so the zero-point parts of the analytic perturbation (the hbar^2
terms) are out of reach here by construction; only the (k_B T')^2 part of the
perturbed spectrum can be validated empirically.

Integrator: stochastic Heun for the drift, with the OU force advanced by its
exact one-step update. Realizations use independent counter-based streams
(Philox keyed by (seed, realization index)), so ensembles are reproducible
bit for bit and realization r is the same whether run alone or in a batch.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .constants import CONSTANTS
from .errors import InvalidParameterError, OracleError, RegimeValidityError
from .model import (
    CurveKind,
    DampingKind,
    OpticalParams,
    OscillatorParams,
    SpectrumCurve,
    derived_optics,
)
from .spectra import gamma_at, kb_t_prime

__all__ = [
    "DeltaComparison",
    "PsdEstimate",
    "SimulationSpec",
    "Trajectory",
    "Window",
    "classical_delta_curve",
    "compare_delta",
    "estimate_psd",
    "read_trajectory",
    "simulate",
    "write_trajectory",
]

# steps per block of pre-drawn noise; an internal chunking detail only, the
# per-realization random stream does not depend on it
_BLOCK = 16384
# full-trajectory storage cap; larger runs must go through the streaming
# PSD path instead of simulate()
_MAX_TRAJECTORY_BYTES = 512 << 20


class Window(enum.Enum):
    HANN = "hann"
    RECT = "rect"


@dataclass(frozen=True)
class SimulationSpec:
    """Complete description of one reproducible ensemble run.

    duration and burn_in are in seconds of simulated time after and before
    the recorded stretch; dt must resolve the fastest of the mechanical
    period, the cavity correlation time and the damping time by a factor of
    fifty. Only viscous damping has a time-domain realisation here.
    """

    osc: OscillatorParams
    opt: OpticalParams
    A: float
    dt: float
    duration: float
    burn_in: float
    seed: int
    n_realizations: int = 1

    def __post_init__(self) -> None:
        if self.osc.damping.kind is not DampingKind.VISCOUS:
            raise InvalidParameterError(
                "the oracle integrates viscous damping only; structural loss "
                "has no canonical time-domain kernel at this level"
            )
        if not (self.A >= 0.0 and math.isfinite(self.A)):
            raise InvalidParameterError(f"A must be non-negative and finite, got {self.A!r}")
        for label in ("dt", "duration"):
            value = getattr(self, label)
            if not (value > 0.0 and math.isfinite(value)):
                raise InvalidParameterError(f"{label} must be positive and finite, got {value!r}")
        gamma = gamma_at(self.osc, self.osc.Omega)
        dt_cap = min(2.0 * math.pi / self.osc.Omega, 2.0 / self.opt.kappa, 1.0 / gamma) / 50.0
        if self.dt > dt_cap * (1.0 + 1e-9):
            raise InvalidParameterError(
                f"dt = {self.dt!r} does not resolve the dynamics; need dt <= {dt_cap!r}"
            )
        if self.burn_in < 10.0 / gamma:
            raise InvalidParameterError(
                f"burn_in = {self.burn_in!r} s is below the steady-state guard "
                f"10/gamma = {10.0 / gamma!r} s"
            )
        if not (isinstance(self.n_realizations, int) and self.n_realizations >= 1):
            raise InvalidParameterError(
                f"n_realizations must be a positive integer, got {self.n_realizations!r}"
            )
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise InvalidParameterError(f"seed must be a 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class Trajectory:
    """Sampled paths after burn-in; x, p, f_rad have shape (n_realizations, n)."""

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    f_rad: np.ndarray
    spec: Optional[SimulationSpec] = None


@dataclass(frozen=True)
class PsdEstimate:
    """Averaged two-sided displacement PSD with per-bin standard errors."""

    omegas: np.ndarray
    mean_psd: np.ndarray
    stderr: np.ndarray
    n_segments: int


@dataclass(frozen=True)
class DeltaComparison:
    """Common-random-number comparison of simulated vs analytic perturbation.

    empirical is PSD(A) - PSD(0) per bin from lockstep paths; z_scores are
    (empirical - analytic)/stderr with excluded bins (the resonance, where
    the classical term vanishes) set to nan; band_rel_dev is
    sum|empirical - analytic| / sum|analytic| over the included bins.
    """

    omegas: np.ndarray
    empirical: np.ndarray
    stderr: np.ndarray
    analytic: np.ndarray
    z_scores: np.ndarray
    excluded: np.ndarray
    band_rel_dev: float
    n_segments: int


def _run_constants(spec: SimulationSpec):
    gamma = gamma_at(spec.osc, spec.osc.Omega)
    if spec.opt.P > 0.0:
        optics = derived_optics(spec.opt)
        ou_var = CONSTANTS.hbar**2 * optics.G**2 * optics.alpha_sq
    else:
        ou_var = 0.0
    return {
        "inv_m": 1.0 / spec.osc.m,
        "gamma": gamma,
        "k_spring": spec.osc.m * spec.osc.Omega**2,
        "sigma_thermal": math.sqrt(2.0 * gamma * spec.osc.m * CONSTANTS.k_B * spec.osc.T * spec.dt),
        "ou_decay": math.exp(-spec.opt.kappa * spec.dt / 2.0),
        "ou_kick": math.sqrt(ou_var * -math.expm1(-spec.opt.kappa * spec.dt)),
        "ou_std": math.sqrt(ou_var),
    }


def _streams(spec: SimulationSpec):
    return [
        np.random.Generator(np.random.Philox(key=[spec.seed, r]))
        for r in range(spec.n_realizations)
    ]


def _draw_block(rngs, n_steps):
    # rows are (thermal, cavity) pairs consumed one per step; chunking into
    # blocks does not change each stream's draw order
    return np.stack([rng.standard_normal((n_steps, 2)) for rng in rngs])


def _advance(state, noise, cubic, rc, record_x=None, record_p=None, record_f=None, offset=0):
    """Heun-advance all columns of the state through one noise block.

    state is (x, p, f) arrays of width W; noise is (W, B, 2); cubic is the
    per-column coefficient 4A/3 (scalar or (W,) array, which is how the
    lockstep comparison carries A > 0 and A = 0 columns side by side on a
    shared noise block). Post-step samples land in record_*[:, offset + b]
    when buffers are given.
    """
    x, p, f = state
    inv_m = rc["inv_m"]
    gamma = rc["gamma"]
    k_spring = rc["k_spring"]
    s_th = rc["sigma_thermal"]
    e_ou = rc["ou_decay"]
    s_ou = rc["ou_kick"]
    dt = rc["dt"]
    half = 0.5 * dt
    # a diverging cubic term overflows before the finiteness check below
    # fires; the explicit abort replaces the per-op warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for b in range(noise.shape[1]):
            kick = s_th * noise[:, b, 0]
            u0 = p + cubic * (p * p * p)
            dx0 = u0 * inv_m
            dp0 = f - k_spring * x - gamma * u0
            x1 = x + dt * dx0
            p1 = p + dt * dp0 + kick
            f = e_ou * f + s_ou * noise[:, b, 1]
            u1 = p1 + cubic * (p1 * p1 * p1)
            dp1 = f - k_spring * x1 - gamma * u1
            x = x + half * (dx0 + u1 * inv_m)
            p = p + half * (dp0 + dp1) + kick
            if record_x is not None:
                record_x[:, offset + b] = x
            if record_p is not None:
                record_p[:, offset + b] = p
            if record_f is not None:
                record_f[:, offset + b] = f
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
        raise OracleError(
            "state became non-finite during integration; the cubic "
            "perturbation is too large for this step size (reduce A or dt)"
        )
    return x, p, f


def _init_state(spec: SimulationSpec, rngs, width: int, rc) -> tuple:
    # x, p start at zero and the burn-in guard carries them to steady state;
    # f_rad starts in its stationary distribution
    f0 = np.array([rng.standard_normal() for rng in rngs]) * rc["ou_std"]
    if width != len(rngs):
        f0 = np.concatenate([f0, f0])
    return np.zeros(width), np.zeros(width), f0


def _blocks(n_steps: int):
    done = 0
    while done < n_steps:
        size = min(_BLOCK, n_steps - done)
        yield done, size
        done += size


def simulate(spec: SimulationSpec) -> Trajectory:
    """Integrate the ensemble and return the full sampled paths.

    Memory-capped: long runs should use estimate_psd(spec, ...), which
    consumes segments as they are produced instead of storing them.
    """
    n_steps = int(round(spec.duration / spec.dt))
    n_burn = int(round(spec.burn_in / spec.dt))
    if n_steps < 1:
        raise InvalidParameterError("duration is shorter than one step")
    total_bytes = 3 * 8 * spec.n_realizations * n_steps
    if total_bytes > _MAX_TRAJECTORY_BYTES:
        raise OracleError(
            f"trajectory storage would take {total_bytes} bytes; "
            "use estimate_psd on the spec for long runs"
        )
    rc = _run_constants(spec)
    rc["dt"] = spec.dt
    rngs = _streams(spec)
    state = _init_state(spec, rngs, spec.n_realizations, rc)
    for _, size in _blocks(n_burn):
        state = _advance(state, _draw_block(rngs, size), 4.0 * spec.A / 3.0, rc)
    xs = np.empty((spec.n_realizations, n_steps))
    ps = np.empty_like(xs)
    fs = np.empty_like(xs)
    for offset, size in _blocks(n_steps):
        state = _advance(
            state, _draw_block(rngs, size), 4.0 * spec.A / 3.0, rc, xs, ps, fs, offset
        )
    # t is measured from the end of burn-in; samples are post-step values
    t = spec.dt * (1.0 + np.arange(n_steps))
    return Trajectory(t=t, x=xs, p=ps, f_rad=fs, spec=spec)


def _window(kind: Window, n: int) -> np.ndarray:
    if kind is Window.HANN:
        # periodic form, the right one for segment averaging
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    return np.ones(n)


def _segment_psd(block: np.ndarray, window: np.ndarray, dt: float) -> np.ndarray:
    """Two-sided PSD of each row, mean removed, DC bin dropped."""
    centered = block - block.mean(axis=-1, keepdims=True)
    spectrum = np.fft.rfft(centered * window, axis=-1)
    scale = dt / np.sum(window**2)
    return scale * np.abs(spectrum[..., 1:]) ** 2


class _RunningMean:
    """Order-fixed accumulation of per-segment periodograms."""

    def __init__(self, n_bins: int):
        self.count = 0
        self.total = np.zeros(n_bins)
        self.total_sq = np.zeros(n_bins)

    def add(self, rows: np.ndarray) -> None:
        self.count += rows.shape[0]
        self.total += rows.sum(axis=0)
        self.total_sq += (rows * rows).sum(axis=0)

    def finish(self) -> tuple[np.ndarray, np.ndarray, int]:
        if self.count < 8:
            raise InvalidParameterError(
                f"only {self.count} segments available; need at least 8 for "
                "a usable average (lengthen the run or shorten the segments)"
            )
        mean = self.total / self.count
        var = (self.total_sq - self.count * mean**2) / (self.count - 1)
        stderr = np.sqrt(np.maximum(var, 0.0) / self.count)
        return mean, stderr, self.count


def _segment_geometry(spec_dt: float, Omega: float, segment_length: float, n_available: int):
    if segment_length < 20.0 * 2.0 * math.pi / Omega:
        raise InvalidParameterError(
            f"segment_length = {segment_length!r} s is shorter than twenty "
            "mechanical periods; the resonance would not be resolved"
        )
    n_per = int(round(segment_length / spec_dt))
    if n_per < 2:
        raise InvalidParameterError("segment_length is shorter than two steps")
    if n_available is not None and n_per > n_available:
        raise InvalidParameterError("segment_length exceeds the available trajectory")
    omegas = 2.0 * math.pi * np.fft.rfftfreq(n_per, spec_dt)[1:]
    return n_per, omegas


def estimate_psd(
    source: Union[Trajectory, SimulationSpec],
    segment_length: float,
    window: Window = Window.HANN,
) -> PsdEstimate:
    """Segmented periodogram average over all realizations.

    Accepts either an existing Trajectory or a SimulationSpec; in the latter
    case realizations are integrated one segment at a time and reduced on the
    fly, so arbitrarily long runs need only one segment of memory. The
    estimate is the two-sided PSD at positive frequencies, directly
    comparable to the analytic spectra; twice its integral over omega/2pi
    recovers the signal variance.
    """
    if isinstance(source, Trajectory):
        if source.spec is None:
            raise InvalidParameterError("trajectory carries no spec; cannot infer dt and Omega")
        spec = source.spec
        n_per, omegas = _segment_geometry(
            spec.dt, spec.osc.Omega, segment_length, source.x.shape[1]
        )
        acc = _RunningMean(omegas.size)
        w = _window(window, n_per)
        n_whole = source.x.shape[1] // n_per
        for r in range(source.x.shape[0]):
            for s in range(n_whole):
                block = source.x[r : r + 1, s * n_per : (s + 1) * n_per]
                acc.add(_segment_psd(block, w, spec.dt))
        mean, stderr, count = acc.finish()
        return PsdEstimate(omegas=omegas, mean_psd=mean, stderr=stderr, n_segments=count)

    spec = source
    n_per, omegas = _segment_geometry(spec.dt, spec.osc.Omega, segment_length, None)
    n_segments = int(round(spec.duration / spec.dt)) // n_per
    if n_segments < 1:
        raise InvalidParameterError("duration is shorter than one segment")
    rc = _run_constants(spec)
    rc["dt"] = spec.dt
    rngs = _streams(spec)
    cubic = 4.0 * spec.A / 3.0
    state = _init_state(spec, rngs, spec.n_realizations, rc)
    for _, size in _blocks(int(round(spec.burn_in / spec.dt))):
        state = _advance(state, _draw_block(rngs, size), cubic, rc)
    acc = _RunningMean(omegas.size)
    w = _window(window, n_per)
    buffer = np.empty((spec.n_realizations, n_per))
    for _ in range(n_segments):
        for offset, size in _blocks(n_per):
            state = _advance(
                state, _draw_block(rngs, size), cubic, rc, record_x=buffer, offset=offset
            )
        acc.add(_segment_psd(buffer, w, spec.dt))
    mean, stderr, count = acc.finish()
    return PsdEstimate(omegas=omegas, mean_psd=mean, stderr=stderr, n_segments=count)


def classical_delta_curve(
    osc: OscillatorParams, opt: OpticalParams, A: float, omegas: np.ndarray
) -> SpectrumCurve:
    """The classically reproducible part of the perturbed spectrum.

    First term of the adiabatic perturbation, 16 A gamma (k_B T')^2 omega^2
    (omega^2 - Omega^2) / D^2; the hbar^2/3 zero-point term is omitted
    because a classical simulation cannot produce it.
    """
    omegas = np.asarray(omegas, dtype=float)
    gamma = gamma_at(osc, omegas)
    kbt = kb_t_prime(osc, opt)
    d = gamma**2 * omegas**2 + (omegas**2 - osc.Omega**2) ** 2
    values = 16.0 * A * gamma * kbt**2 * omegas**2 * (omegas**2 - osc.Omega**2) / d**2
    return SpectrumCurve(omegas=omegas, values=values, kind=CurveKind.PERTURBATION)


def _check_lockstep(spec_a: SimulationSpec, spec_ref: SimulationSpec) -> None:
    if spec_ref.A != 0.0:
        raise InvalidParameterError("reference spec must have A = 0")
    paired = (
        spec_a.osc == spec_ref.osc
        and spec_a.opt == spec_ref.opt
        and spec_a.dt == spec_ref.dt
        and spec_a.duration == spec_ref.duration
        and spec_a.burn_in == spec_ref.burn_in
        and spec_a.seed == spec_ref.seed
        and spec_a.n_realizations == spec_ref.n_realizations
    )
    if not paired:
        raise InvalidParameterError(
            "the two specs must be identical apart from A so the runs share "
            "random numbers"
        )
    strength = spec_a.A * spec_a.osc.m * kb_t_prime(spec_a.osc, spec_a.opt)
    if strength > 1e-2:
        raise RegimeValidityError(
            f"A m k_B T' = {strength!r} exceeds the perturbative guard 1e-2; "
            "the first-order comparison would not be meaningful"
        )


def compare_delta(
    spec_a: SimulationSpec,
    spec_ref: SimulationSpec,
    analytic: SpectrumCurve,
    segment_length: float,
    window: Window = Window.HANN,
    exclude_halfwidth: Optional[float] = None,
) -> DeltaComparison:
    """Empirical PSD(A) - PSD(0) against the analytic classical term.

    Both systems are advanced in lockstep on one shared noise stream (the
    perturbed and reference columns sit side by side in the state vectors),
    so the per-segment periodogram differences subtract nearly all of the
    common thermal fluctuation; stderr comes from those paired differences.
    The analytic curve is interpolated onto the estimator bins, which must
    lie inside its frequency range. Bins within exclude_halfwidth of the
    resonance (default: two bin widths, the window main lobe) are excluded
    from z-scores and the band deviation; the classical term vanishes at
    resonance and leakage from the peak dominates there.
    """
    _check_lockstep(spec_a, spec_ref)
    spec = spec_a
    n_per, omegas = _segment_geometry(spec.dt, spec.osc.Omega, segment_length, None)
    n_segments = int(round(spec.duration / spec.dt)) // n_per
    if n_segments < 1:
        raise InvalidParameterError("duration is shorter than one segment")

    ana_om = np.asarray(analytic.omegas, dtype=float)
    if ana_om.size < 2 or np.min(omegas) < ana_om.min() or np.max(omegas) > ana_om.max():
        raise InvalidParameterError(
            "analytic curve does not cover the estimator bins "
            f"[{omegas.min()!r}, {omegas.max()!r}] rad/s"
        )
    analytic_bins = np.interp(omegas, ana_om, np.asarray(analytic.values, dtype=float))

    rc = _run_constants(spec)
    rc["dt"] = spec.dt
    rngs = _streams(spec)
    n_real = spec.n_realizations
    # perturbed columns first, reference columns second, same noise for both
    cubic = np.concatenate(
        [np.full(n_real, 4.0 * spec.A / 3.0), np.zeros(n_real)]
    )
    state = _init_state(spec, rngs, 2 * n_real, rc)
    for _, size in _blocks(int(round(spec.burn_in / spec.dt))):
        block = _draw_block(rngs, size)
        state = _advance(state, np.concatenate([block, block]), cubic, rc)
    acc = _RunningMean(omegas.size)
    w = _window(window, n_per)
    buffer = np.empty((2 * n_real, n_per))
    for _ in range(n_segments):
        for offset, size in _blocks(n_per):
            block = _draw_block(rngs, size)
            state = _advance(
                state,
                np.concatenate([block, block]),
                cubic,
                rc,
                record_x=buffer,
                offset=offset,
            )
        psd = _segment_psd(buffer, w, spec.dt)
        acc.add(psd[:n_real] - psd[n_real:])
    empirical, stderr, count = acc.finish()

    if exclude_halfwidth is None:
        exclude_halfwidth = 2.0 * (omegas[1] - omegas[0]) * (1.0 + 1e-12)
    excluded = np.abs(omegas - spec.osc.Omega) <= exclude_halfwidth
    residual = empirical - analytic_bins
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0.0, residual / stderr, np.where(residual == 0.0, 0.0, np.inf))
    z = np.where(excluded, np.nan, z)
    included = ~excluded
    denom = np.sum(np.abs(analytic_bins[included]))
    band = float(np.sum(np.abs(residual[included])) / denom) if denom > 0.0 else 0.0
    return DeltaComparison(
        omegas=omegas,
        empirical=empirical,
        stderr=stderr,
        analytic=analytic_bins,
        z_scores=z,
        excluded=excluded,
        band_rel_dev=band,
        n_segments=count,
    )


_TRAJECTORY_MAGIC = "gupnoise-trajectory v1"


def write_trajectory(traj: Trajectory, path) -> None:
    """Binary dump: one text header line, then little-endian float64 records.

    Records are (t, x, p, f_rad) per sample, realizations concatenated in
    order.
    """
    n_real, n = traj.x.shape
    header = (
        f"# {_TRAJECTORY_MAGIC} realizations={n_real} samples={n} "
        "columns=t,x,p,f_rad dtype=<f8\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for r in range(n_real):
            rows = np.column_stack([traj.t, traj.x[r], traj.p[r], traj.f_rad[r]])
            fh.write(np.ascontiguousarray(rows, dtype="<f8").tobytes())


def read_trajectory(path) -> Trajectory:
    """Inverse of write_trajectory; the spec is not stored and comes back None."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace")
        if _TRAJECTORY_MAGIC not in header:
            raise OracleError(f"not a trajectory file: {path}")
        fields = dict(
            part.split("=", 1) for part in header.strip("#\n ").split() if "=" in part
        )
        n_real = int(fields["realizations"])
        n = int(fields["samples"])
        data = np.frombuffer(fh.read(), dtype="<f8")
    expected = n_real * n * 4
    if data.size != expected:
        raise OracleError(
            f"trajectory file is truncated: {data.size} values, expected {expected}"
        )
    records = data.reshape(n_real, n, 4)
    return Trajectory(
        t=records[0, :, 0].copy(),
        x=np.ascontiguousarray(records[:, :, 1]),
        p=np.ascontiguousarray(records[:, :, 2]),
        f_rad=np.ascontiguousarray(records[:, :, 3]),
        spec=None,
    )
