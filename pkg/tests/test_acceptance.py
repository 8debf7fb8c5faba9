"""End-to-end acceptance gate.

Reproduces the headline physics numbers on the bundled presets, checks the
closed-form regime formulas against the full expressions on randomized
high-Q systems, cross-validates the analytic perturbation against the
Monte-Carlo integrator, and spot-checks the steady-state identities. Frozen
values are regression pins from the first verified run; the wider windows
are the externally meaningful tolerances.
"""

import dataclasses
import math

import numpy as np
import pytest

from gupnoise.bounds import (
    NoiseRegime,
    SweepSpec,
    SweepVariable,
    beta_bound_at,
    beta_bound_curve,
    driven_bound,
    headline_bound,
    omega_sql,
    omega_sql_numeric,
    steady_variances,
    sweep,
)
from gupnoise.constants import CONSTANTS
from gupnoise.model import (
    BoundCriterion,
    DampingKind,
    DampingModel,
    GupModel,
    OpticalParams,
    OscillatorParams,
    derived_optics,
    preset,
    PRESET_NAMES,
)
from gupnoise.oracle import (
    SimulationSpec,
    classical_delta_curve,
    compare_delta,
    estimate_psd,
    simulate,
)
from gupnoise.spectra import (
    TemperatureForm,
    kb_t_prime,
    perturbed_spectrum_adiabatic,
    perturbed_spectrum_general,
    regime_free_mass,
    regime_resonance,
    standard_spectrum,
)

HBAR, KB = CONSTANTS.hbar, CONSTANTS.k_B
GUP1 = GupModel(beta0=1.0)


def random_high_q_system(rng):
    """Viscous oscillator with kappa >= 1e4 Omega and k_B T' >= 1e3 hbar Omega.

    The drive is sized so radiation heating stays a tiny fraction of the
    bath; that keeps T positive and the driven corrections to deltaS far
    below the 1% agreement budget.
    """
    Omega = 10.0 ** rng.uniform(4.0, 8.0)
    Q = 10.0 ** rng.uniform(3.0, 6.0)
    m = 10.0 ** rng.uniform(-15.0, -9.0)
    kappa = Omega * 1.0e4 * rng.uniform(1.0, 10.0)
    kbt = HBAR * Omega * 10.0 ** rng.uniform(3.0, 5.0)
    gamma = Omega / Q
    nu, L = 2.82e14, 1.0e-3
    radcap = 3.0e-4 * kappa * (HBAR * Omega) ** 2 / (29.25 * gamma * kbt**2)
    radfrac = min(1.0e-4, radcap)
    delta_kbt = radfrac * kbt
    # invert the adiabatic heating delta(k_B T') = 2 hbar^2 G^2 alpha^2/(kappa gamma m)
    P = delta_kbt * kappa**2 * gamma * m * L**2 / (8.0 * CONSTANTS.h * nu)
    osc = OscillatorParams(
        m=m, Omega=Omega, damping=DampingModel(DampingKind.VISCOUS, Q), T=(kbt - delta_kbt) / KB
    )
    opt = OpticalParams(nu=nu, P=P, L=L, kappa=kappa, eta2=1.0)
    return osc, opt


@pytest.fixture(scope="module")
def random_systems():
    rng = np.random.default_rng(2026)
    return [random_high_q_system(rng) for _ in range(100)]


# desk-scale units for the Monte-Carlo runs: m = Omega = 1, k_B T = 1
DESK_OSC = OscillatorParams(
    m=1.0, Omega=1.0, damping=DampingModel(DampingKind.VISCOUS, 100.0), T=1.0 / KB
)
DESK_OPT = OpticalParams(nu=1.0, P=0.0, L=1.0, kappa=0.2, eta2=1.0)
DESK_A = 1.0e-4
_N_PER, _SEGS, _REAL, _DT = 131072, 2, 200, 0.04


@pytest.fixture(scope="module")
def delta_run():
    """Common-random-number comparison of the A=1e-4 ensemble against A=0."""
    duration = _SEGS * _N_PER * _DT
    spec_a = SimulationSpec(
        osc=DESK_OSC, opt=DESK_OPT, A=DESK_A, dt=_DT, duration=duration,
        burn_in=1000.0, seed=2026, n_realizations=_REAL,
    )
    spec_0 = dataclasses.replace(spec_a, A=0.0)
    bins = 2.0 * np.pi * np.fft.rfftfreq(_N_PER, _DT)[1:]
    analytic = classical_delta_curve(DESK_OSC, DESK_OPT, DESK_A, bins)
    return compare_delta(spec_a, spec_0, analytic, segment_length=_N_PER * _DT)


class TestPublishedBounds:
    """Resonance and side-of-resonance bounds for the tabulated experiments."""

    @pytest.mark.parametrize(
        "name, target, beta0_pin, beta_e_pin, beta0_scale, beta_e_scale",
        [
            ("purdy2013", 4e-32, 1.235863e41, 1.954232e73, 1e41, 1e73),
            ("teufel2016", 1e-26, 2.741053e41, 6.390942e69, 1e42, 1e70),
        ],
    )
    def test_resonance_bounds(self, name, target, beta0_pin, beta_e_pin, beta0_scale, beta_e_scale):
        p = preset(name)
        r = beta_bound_at(p.oscillator, p.optics, p.oscillator.Omega, target)
        assert r.beta0_max == pytest.approx(beta0_pin, rel=1e-5)
        assert r.beta_e_max == pytest.approx(beta_e_pin, rel=1e-5)
        assert beta0_scale / 10.0 <= r.beta0_max <= beta0_scale * 10.0
        assert beta_e_scale / 10.0 <= r.beta_e_max <= beta_e_scale * 10.0

    @pytest.mark.parametrize(
        "name, target, beta0_pin, beta0_scale",
        [
            ("purdy2013", 4e-32, 4.351658e31, 1e31),
            ("teufel2016", 1e-26, 1.601387e28, 1e28),
        ],
    )
    def test_side_of_resonance_bounds(self, name, target, beta0_pin, beta0_scale):
        p = preset(name)
        osc = p.oscillator
        omega = osc.Omega + osc.gamma_reference() / 2.0
        r = beta_bound_at(osc, p.optics, omega, target)
        assert r.beta0_max == pytest.approx(beta0_pin, rel=1e-5)
        assert beta0_scale / 5.0 <= r.beta0_max <= beta0_scale * 5.0

    def test_interferometer_headline_bound(self):
        p = preset("aligo")
        assert p.oscillator.damping.kind is DampingKind.STRUCTURAL
        grid = 2.0 * np.pi * np.geomspace(20.0, 100.0, 181)
        results = beta_bound_curve(
            p.oscillator, p.optics, grid,
            criterion=BoundCriterion.FIXED_TARGET, target=9e-40,
        )
        best = headline_bound(results)
        assert best.beta0_max == pytest.approx(2.691960e20, rel=1e-5)
        assert best.beta_e_max == pytest.approx(8.687167e76, rel=1e-5)
        assert best.omega == pytest.approx(2.0 * np.pi * 20.0, rel=1e-12)
        assert 1e20 <= best.beta0_max <= 1e22
        assert 1e75 <= best.beta_e_max <= 1e77


class TestRegimeConsistency:
    """Closed regime formulas against the full expressions, 100 random systems."""

    def test_general_matches_adiabatic_away_from_cancellations(self, random_systems):
        worst = 0.0
        for osc, opt in random_systems:
            grid = np.geomspace(0.1 * osc.Omega, 10.0 * osc.Omega, 501)
            s_std = standard_spectrum(osc, opt, grid)
            d_gen = perturbed_spectrum_general(osc, opt, GUP1, grid)
            d_ad = perturbed_spectrum_adiabatic(osc, opt, GUP1, grid)
            # drop bins where the perturbation, scaled to a visible level,
            # dips below float resolution of the standard spectrum: these are
            # the sign-change cancellation bands
            beta_star = np.max(s_std) / np.max(np.abs(d_ad))
            keep = np.abs(d_ad) * beta_star > 1e-12 * s_std
            worst = max(worst, float(np.max(np.abs(d_gen[keep] / d_ad[keep] - 1.0))))
        assert worst < 1e-2

    def test_resonance_value_is_pure_zero_point(self, random_systems):
        worst = 0.0
        for osc, opt in random_systems:
            ds = perturbed_spectrum_adiabatic(osc, opt, GUP1, osc.Omega)
            worst = max(worst, abs(ds / regime_resonance(osc, GUP1) - 1.0))
        assert worst < 1e-10

    def test_free_mass_formula_at_hundred_omega(self, random_systems):
        worst = 0.0
        for osc, opt in random_systems:
            fm = regime_free_mass(osc, opt, GUP1, 100.0 * osc.Omega)
            full = perturbed_spectrum_adiabatic(osc, opt, GUP1, 100.0 * osc.Omega)
            worst = max(worst, abs(fm / full - 1.0))
        assert worst < 2e-2

    def test_side_to_resonance_ratio(self, random_systems):
        worst = 0.0
        for osc, opt in random_systems:
            gamma0 = osc.gamma_reference() / 2.0
            res = perturbed_spectrum_adiabatic(osc, opt, GUP1, osc.Omega)
            side = perturbed_spectrum_adiabatic(osc, opt, GUP1, osc.Omega + gamma0)
            predicted = 6.0 * osc.damping.Q * (kb_t_prime(osc, opt) / (HBAR * osc.Omega)) ** 2
            worst = max(worst, abs(abs(side) / res / predicted - 1.0))
        assert worst < 5e-2


class TestOracleCrossValidation:
    """Monte-Carlo ensemble versus the classical part of the perturbation."""

    def test_side_bins_match_closed_form(self, delta_run):
        assert delta_run.n_segments == _SEGS * _REAL
        gamma = DESK_OSC.gamma_reference()
        closed = 4.0 * DESK_A * (KB * DESK_OSC.T) ** 2 / (gamma**2 * DESK_OSC.Omega)
        for sign in (+1, -1):
            target = DESK_OSC.Omega + sign * gamma / 2.0
            i = int(np.argmin(np.abs(delta_run.omegas - target)))
            assert not delta_run.excluded[i]
            emp = delta_run.empirical[i]
            assert abs(emp - sign * closed) / closed < 0.25
        assert delta_run.band_rel_dev < 0.15

    def test_sign_flips_across_resonance(self, delta_run):
        dw = delta_run.omegas[1] - delta_run.omegas[0]
        om = delta_run.omegas
        above = (om > DESK_OSC.Omega + 2 * dw) & (om < DESK_OSC.Omega + 0.008) & ~delta_run.excluded
        below = (om > DESK_OSC.Omega - 0.008) & (om < DESK_OSC.Omega - 2 * dw) & ~delta_run.excluded
        assert above.sum() >= 3 and below.sum() >= 3
        assert np.all(delta_run.empirical[above] > 0)
        assert np.all(delta_run.empirical[below] < 0)

    def test_null_difference_is_statistically_zero(self):
        n_per, segs, reals = 16384, 2, 24
        duration = segs * n_per * _DT
        runs = []
        for seed in (11, 12):
            spec = SimulationSpec(
                osc=DESK_OSC, opt=DESK_OPT, A=0.0, dt=_DT, duration=duration,
                burn_in=1000.0, seed=seed, n_realizations=reals,
            )
            runs.append(estimate_psd(spec, segment_length=n_per * _DT))
        diff = runs[0].mean_psd - runs[1].mean_psd
        se = np.hypot(runs[0].stderr, runs[1].stderr)
        z = np.where(se > 0, diff / se, 0.0)
        assert np.mean(np.abs(z) < 3.0) >= 0.95


class TestSteadyStateIdentities:
    def test_oracle_variances_match_closed_forms(self):
        osc = OscillatorParams(
            m=1.0, Omega=1.0, damping=DampingModel(DampingKind.VISCOUS, 50.0), T=1.0 / KB
        )
        opt = OpticalParams(nu=1.0 / (2.0 * math.pi * HBAR), P=0.0125, L=1.0, kappa=1.0, eta2=1.0)
        spec = SimulationSpec(
            osc=osc, opt=opt, A=0.0, dt=0.04, duration=8000.0,
            burn_in=600.0, seed=99, n_realizations=48,
        )
        traj = simulate(spec)
        x_want, p_want = steady_variances(osc, opt)
        assert np.var(traj.x) == pytest.approx(x_want, rel=5e-2)
        assert np.var(traj.p) == pytest.approx(p_want, rel=5e-2)
        d = derived_optics(opt)
        assert np.var(traj.f_rad) == pytest.approx(HBAR**2 * d.G**2 * d.alpha_sq, rel=5e-2)

    def test_temperature_forms_agree_at_large_kappa(self, random_systems):
        worst = 0.0
        for osc, opt in random_systems[:20]:
            # amplify the drive so the radiation term is actually exercised
            hot = dataclasses.replace(opt, P=opt.P * 1e3)
            ad = kb_t_prime(osc, hot, TemperatureForm.ADIABATIC)
            ex = kb_t_prime(osc, hot, TemperatureForm.EXACT)
            worst = max(worst, abs(ad / ex - 1.0))
        assert worst < 1e-2

    def test_white_noise_coefficient_identity(self):
        for name in PRESET_NAMES:
            p = preset(name)
            d = derived_optics(p.optics)
            lhs = 4.0 * HBAR**2 * d.G**2 * d.alpha_sq / p.optics.kappa
            rhs = (
                16.0 * CONSTANTS.h * p.optics.nu * p.optics.P * d.finesse**2
                / (math.pi * CONSTANTS.c) ** 2
            )
            assert lhs == pytest.approx(rhs, rel=1e-10)


class TestSqlFrequency:
    def test_undriven_sql_is_resonance_exactly(self):
        for name in PRESET_NAMES:
            p = preset(name)
            dark = dataclasses.replace(p.optics, P=0.0)
            assert omega_sql(p.oscillator, dark) == p.oscillator.Omega

    def test_interferometer_sql_value(self):
        p = preset("aligo")
        w = omega_sql(p.oscillator, p.optics)
        assert w == pytest.approx(235.19479038824696, rel=1e-9)
        # hand evaluation of the same closed form
        assert w == pytest.approx(235.17, rel=5e-2)

    def test_numeric_argmin_tracks_closed_form(self):
        for name in ("purdy2013", "teufel2016", "murch2008"):
            p = preset(name)
            w_closed = omega_sql(p.oscillator, p.optics)
            w_num = omega_sql_numeric(p.oscillator, p.optics)
            assert abs(w_num - w_closed) / w_closed < 0.20


class TestParameterSweeps:
    def test_power_sweep_reaches_expected_scale(self):
        p = preset("murch2008")
        grid = tuple(p.oscillator.Omega * np.geomspace(10.0, 1.0e4, 241))
        spec = SweepSpec(
            variable=SweepVariable.POWER, scale_factors=(1.0, 1.0e3), frequency_grid=grid
        )
        pts = sweep(p.oscillator, p.optics, spec)
        assert pts[0].bound.beta_e_max == pytest.approx(1.2164e43, rel=1e-3)
        assert pts[1].bound.beta_e_max == pytest.approx(1.2168e37, rel=1e-3)
        assert 1e36 <= pts[1].bound.beta_e_max <= 1e38

    def test_power_sweep_fixed_frequency_improvement(self):
        # at a fixed free-mass frequency the bound improves linearly with
        # drive power once radiation pressure dominates: x1e3 power buys
        # three orders of magnitude
        p = preset("murch2008")
        omega = 10.0 * p.oscillator.Omega
        bounds = []
        for s in (1.0, 1.0e3):
            hot = dataclasses.replace(p.optics, P=p.optics.P * s)
            bounds.append(beta_bound_curve(p.oscillator, hot, np.array([omega]))[0].beta0_max)
        assert bounds[0] / bounds[1] == pytest.approx(1.0e3, rel=0.2)

    def test_kappa_and_length_sweeps_overlap(self):
        p = preset("murch2008")
        scales = (1.0, 10.0, 100.0, 1000.0)
        curves = {}
        for var in (SweepVariable.KAPPA, SweepVariable.LENGTH):
            spec = SweepSpec(variable=var, scale_factors=scales, side_of_resonance=True)
            pts = sweep(p.oscillator, p.optics, spec)
            curves[var] = np.array([pt.bound.beta0_max for pt in pts])
        assert curves[SweepVariable.KAPPA][0] == pytest.approx(9.8033e38, rel=1e-3)
        rel = np.abs(curves[SweepVariable.KAPPA] / curves[SweepVariable.LENGTH] - 1.0)
        assert np.max(rel) < 0.10


class TestDrivenBound:
    def test_free_mass_spot_check(self):
        value = driven_bound(10.0, 5.3e-2, 0.0, NoiseRegime.FREE_MASS)
        assert value == pytest.approx(1.0041113209905659, rel=1e-12)
        assert value == pytest.approx(1.0, rel=5e-2)
