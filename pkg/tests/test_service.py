"""HTTP surface: handler behaviour, error mapping, parameter resolution."""

import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from gupnoise import __version__
from gupnoise.bounds import beta_bound_at, beta_bound_curve, omega_sql, omega_sql_numeric
from gupnoise.ligo import ALIGO_IFO, translate
from gupnoise.model import BoundCriterion, preset
from gupnoise.service import app, apply_overrides, resolve_system
from gupnoise.schemas import SystemRequest
from gupnoise.spectra import standard_spectrum

client = TestClient(app)

DESK_SYSTEM = {
    "oscillator": {"m": 1.0, "Omega": 1.0, "T": 7.242971666663e22, "damping": {"kind": "viscous", "Q": 20.0}},
    "optics": {"nu": 1.0, "P": 0.0, "L": 1.0, "kappa": 0.2, "eta2": 1.0},
}


def _grid(lo, hi, n=9, spacing="log"):
    return {"omega_min": lo, "omega_max": hi, "points": n, "spacing": spacing}


class TestResolution:
    def test_preset_plus_override(self):
        osc, opt = resolve_system(
            SystemRequest(preset="purdy2013", overrides={"P": 1e-4, "Q": 500})
        )
        base = preset("purdy2013")
        assert opt.P == 1e-4
        assert osc.damping.Q == 500
        assert osc.m == base.oscillator.m

    def test_gamma_override_tracks_new_omega(self):
        osc, _ = resolve_system(
            SystemRequest(preset="purdy2013", overrides={"Omega": 2e6, "gamma": 1e3})
        )
        assert osc.damping.Q == pytest.approx(2e3, rel=1e-12)

    def test_override_conflicts_and_unknowns(self):
        base = preset("purdy2013")
        with pytest.raises(Exception, match="either Q or gamma"):
            apply_overrides(base.oscillator, base.optics, {"Q": 1.0, "gamma": 1.0})
        with pytest.raises(Exception, match="unknown override"):
            apply_overrides(base.oscillator, base.optics, {"finesse": 1.0})
        with pytest.raises(Exception, match="must be a number"):
            apply_overrides(base.oscillator, base.optics, {"P": "lots"})

    def test_system_required(self):
        with pytest.raises(Exception, match="preset name or an explicit"):
            resolve_system(SystemRequest())
        with pytest.raises(Exception, match="not both"):
            resolve_system(
                SystemRequest(preset="purdy2013", oscillator=DESK_SYSTEM["oscillator"], optics=DESK_SYSTEM["optics"])
            )


class TestSpectrumEndpoints:
    def test_spectrum_matches_core(self):
        body = {"preset": "purdy2013", "grid": _grid(9.0e6, 1.05e7, 7)}
        r = client.post("/spectrum", json=body)
        assert r.status_code == 200
        payload = r.json()
        assert payload["kind"] == "standard"
        assert payload["meta"]["artifact_version"] == __version__
        assert payload["meta"]["damping_model"] == "viscous"
        p = preset("purdy2013")
        expected = standard_spectrum(p.oscillator, p.optics, np.geomspace(9.0e6, 1.05e7, 7))
        assert np.allclose(payload["psd_m2_per_hz"], expected, rtol=1e-12)

    def test_spectrum_explicit_system_without_shot(self):
        body = {
            "oscillator": DESK_SYSTEM["oscillator"],
            "optics": DESK_SYSTEM["optics"],
            "grid": _grid(0.5, 2.0, 5, "linear"),
            "include_shot": False,
        }
        r = client.post("/spectrum", json=body)
        assert r.status_code == 200
        assert all(v > 0 for v in r.json()["psd_m2_per_hz"])

    def test_shot_without_drive_is_a_parameter_error(self):
        body = {
            "oscillator": DESK_SYSTEM["oscillator"],
            "optics": DESK_SYSTEM["optics"],
            "grid": _grid(0.5, 2.0, 5),
        }
        r = client.post("/spectrum", json=body)
        assert r.status_code == 400
        assert "shot" in r.json()["detail"]

    def test_delta_spectrum_sign_and_linearity(self):
        grid = _grid(9.0e6, 1.05e7, 11)
        r1 = client.post("/delta-spectrum", json={"preset": "purdy2013", "grid": grid, "beta0": 1.0})
        r2 = client.post("/delta-spectrum", json={"preset": "purdy2013", "grid": grid, "beta0": 2.0})
        assert r1.status_code == 200 and r2.status_code == 200
        v1 = np.array(r1.json()["psd_m2_per_hz"])
        v2 = np.array(r2.json()["psd_m2_per_hz"])
        om = np.array(r1.json()["omega_rad_s"])
        assert r1.json()["kind"] == "perturbation"
        assert r1.json()["meta"]["formula_variant"] == "general"
        assert np.allclose(v2, 2.0 * v1, rtol=1e-12)
        assert np.all(v1[om < 9.7e6] < 0)
        assert np.all(v1[om > 9.8e6] > 0)


class TestBoundEndpoints:
    def test_bound_at_resonance_matches_core(self):
        r = client.post(
            "/bound",
            json={"preset": "teufel2016", "omega": "resonance", "criterion": "relative-noise"},
        )
        assert r.status_code == 200
        p = preset("teufel2016")
        target = standard_spectrum(p.oscillator, p.optics, p.oscillator.Omega)
        expected = beta_bound_at(
            p.oscillator, p.optics, p.oscillator.Omega, target, criterion=BoundCriterion.RELATIVE_NOISE
        )
        payload = r.json()
        assert payload["beta0_max"] == pytest.approx(expected.beta0_max, rel=1e-12)
        assert payload["beta_e_max"] == pytest.approx(expected.beta_e_max, rel=1e-12)
        assert payload["omega_rad_s"] == p.oscillator.Omega

    def test_bound_sql_default_target(self):
        r = client.post("/bound", json={"preset": "purdy2013", "omega": "sql"})
        assert r.status_code == 200
        p = preset("purdy2013")
        w = omega_sql(p.oscillator, p.optics)
        assert r.json()["omega_rad_s"] == pytest.approx(w, rel=1e-12)
        assert r.json()["target_psd"] == pytest.approx(
            float(standard_spectrum(p.oscillator, p.optics, w)), rel=1e-12
        )

    def test_unbounded_maps_to_409(self):
        r = client.post(
            "/bound", json={"preset": "purdy2013", "omega": 0.0, "form": "adiabatic"}
        )
        assert r.status_code == 409
        assert r.json()["error"] == "UnboundedBoundError"

    def test_bound_curve_with_observed(self):
        p = preset("purdy2013")
        om = list(np.geomspace(9.0e6, 1.05e7, 15))
        psd = [float(v) for v in standard_spectrum(p.oscillator, p.optics, np.asarray(om))]
        r = client.post(
            "/bound-curve",
            json={"preset": "purdy2013", "observed": {"omega_rad_s": om, "psd_m2_per_hz": psd}},
        )
        assert r.status_code == 200
        payload = r.json()
        assert len(payload["points"]) == len(om)
        finite = [pt["beta0_max"] for pt in payload["points"] if pt["beta0_max"] != "inf"]
        assert payload["headline"]["beta0_max"] == min(finite)
        results = beta_bound_curve(p.oscillator, p.optics, np.asarray(om))
        assert payload["points"][3]["beta0_max"] == pytest.approx(results[3].beta0_max, rel=1e-12)

    def test_bound_curve_needs_grid_or_observed(self):
        r = client.post("/bound-curve", json={"preset": "purdy2013"})
        assert r.status_code == 400

    def test_sweep_side_of_resonance(self):
        r = client.post(
            "/sweep",
            json={"preset": "murch2008", "variable": "power", "scales": [1.0, 1000.0], "side_of_resonance": True},
        )
        assert r.status_code == 200
        pts = r.json()["points"]
        assert [pt["scale"] for pt in pts] == [1.0, 1000.0]
        assert pts[1]["beta0_max"] < pts[0]["beta0_max"]

    def test_sweep_without_grid_or_side_rejected(self):
        r = client.post(
            "/sweep", json={"preset": "murch2008", "variable": "power", "scales": [1.0]}
        )
        assert r.status_code == 400


class TestOtherEndpoints:
    def test_sql_numeric(self):
        r = client.post("/sql", json={"preset": "aligo", "numeric": True})
        assert r.status_code == 200
        p = preset("aligo")
        assert r.json()["omega_sql_rad_s"] == pytest.approx(omega_sql(p.oscillator, p.optics), rel=1e-12)
        assert r.json()["omega_argmin_rad_s"] == pytest.approx(
            omega_sql_numeric(p.oscillator, p.optics), rel=1e-12
        )

    def test_translate_ligo(self):
        import dataclasses

        mapping = {k: v for k, v in dataclasses.asdict(ALIGO_IFO).items() if v is not None}
        r = client.post("/translate-ligo", json={"interferometer": mapping, "name": "h1"})
        assert r.status_code == 200
        payload = r.json()
        osc, opt = translate(ALIGO_IFO)
        assert payload["name"] == "h1"
        assert payload["system"]["optics"]["kappa"] == pytest.approx(opt.kappa, rel=1e-12)
        assert payload["system"]["oscillator"]["damping"]["kind"] == "structural"
        assert payload["max_rel_dev_radiation"] < 0.05
        assert payload["max_rel_dev_shot"] < 0.05

    def test_translate_rejects_bad_mapping(self):
        r = client.post("/translate-ligo", json={"interferometer": {"mirror_mass": 40.0}})
        assert r.status_code == 400

    def test_presets_listing(self):
        r = client.get("/presets")
        assert r.status_code == 200
        names = [p["name"] for p in r.json()["presets"]]
        assert names == ["aligo", "murch2008", "purdy2013", "teufel2016"]
        assert r.json()["artifact_version"] == __version__

    def test_oracle_small_run(self):
        body = {
            "oscillator": DESK_SYSTEM["oscillator"],
            "optics": DESK_SYSTEM["optics"],
            "segments": 8,
            "segment_periods": 20.0,
            "realizations": 1,
            "seed": 5,
        }
        r = client.post("/oracle", json=body)
        assert r.status_code == 200
        payload = r.json()
        assert payload["n_segments"] == 8
        assert payload["seed"] == 5
        assert len(payload["omega_rad_s"]) == len(payload["psd_m2_per_hz"]) == len(payload["stderr"])
        assert all(s > 0 for s in payload["stderr"])
        # duration snaps to an exact number of whole segments
        n_per = round(payload["duration"] / payload["dt"]) // 8
        assert n_per * payload["dt"] >= 20.0 * 2.0 * math.pi / 1.0

    def test_oracle_structural_damping_rejected(self):
        r = client.post("/oracle", json={"preset": "aligo", "segments": 8, "realizations": 1})
        assert r.status_code == 400

    def test_schema_violation_is_422(self):
        r = client.post("/spectrum", json={"preset": "purdy2013"})
        assert r.status_code == 422
        r = client.post("/spectrum", json={"preset": "purdy2013", "grid": _grid(1.0, 2.0), "bogus": 1})
        assert r.status_code == 422
