"""Rate formula, beta factors, spectra, bandwidth metric."""

import numpy as np
import pytest

from pcwkit import (EmissionParams, EmissionPoint, NotCoupledError, ParameterError,
                    beta_bandwidth, beta_factor, beta_from_measurement, decay_rate,
                    decay_rate_spectrum, scaled_frequency)
from pcwkit.dispersion import WaveguideMode
from pcwkit.pwe import C_LIGHT

# Worked input set: omega = 2 pi c / 960 nm, v_g = c/50, V_eff = 5e-20 m^3,
# eps = 7.29, a = 256 nm, Gamma0 = 1.1 /ns.  Frozen from a 50-digit
# evaluation of the rate formula.
ORACLE_RATIO = 2.8615578464939513
ORACLE_GAMMA_NS = 3.1477136311433465


def worked_params():
    return EmissionParams(gamma0=1.1, eps=7.29, a=256e-9)


def worked_inputs():
    omega = 2 * np.pi * C_LIGHT / 960e-9
    return omega, C_LIGHT / 50.0, 5e-20


def test_decay_rate_matches_high_precision_oracle():
    omega, vg, veff = worked_inputs()
    got = decay_rate(omega, vg, veff, worked_params())
    assert abs(got - ORACLE_GAMMA_NS) / ORACLE_GAMMA_NS < 1e-12
    assert abs(got / 1.1 - ORACLE_RATIO) / ORACLE_RATIO < 1e-12


def test_decay_rate_unit_audit():
    # ns^-1 output equals the SI evaluation scaled by 1e-9
    omega, vg, veff = worked_inputs()
    p = worked_params()
    si = (p.gamma0 * 1e9) * 3 * np.pi * C_LIGHT**3 * p.a / (
        veff * omega**2 * p.eps**1.5 * vg)
    assert decay_rate(omega, vg, veff, p) == pytest.approx(si * 1e-9, rel=1e-14)


def test_decay_rate_scaling_laws(rng):
    omega, vg, veff = worked_inputs()
    p = worked_params()
    base = decay_rate(omega, vg, veff, p)
    assert decay_rate(omega, vg / 2, veff, p) == pytest.approx(2 * base, rel=1e-12)
    for _ in range(20):
        s = float(rng.uniform(0.2, 5.0))
        assert decay_rate(omega, s * vg, veff, p) == pytest.approx(
            base / s, rel=1e-12)
        assert decay_rate(omega, vg, s * veff, p) == pytest.approx(
            base / s, rel=1e-12)


def test_decay_rate_clamps_at_vg_floor():
    omega, _, veff = worked_inputs()
    p = worked_params()
    at_floor = decay_rate(omega, p.vg_floor, veff, p)
    assert decay_rate(omega, p.vg_floor / 100.0, veff, p) == at_floor
    assert decay_rate(omega, p.vg_floor * 0.999, veff, p) == at_floor


def test_decay_rate_rejects_non_positive_inputs():
    omega, vg, veff = worked_inputs()
    p = worked_params()
    for bad in ((0.0, vg, veff), (omega, -1.0, veff), (omega, vg, 0.0)):
        with pytest.raises(ParameterError):
            decay_rate(*bad, p)


def test_emission_params_validation():
    with pytest.raises(ParameterError):
        EmissionParams(gamma0=0.0)
    with pytest.raises(ParameterError):
        EmissionParams(eps=0.5)
    with pytest.raises(ParameterError):
        EmissionParams(vg_floor=0.0)


def test_beta_factor_values():
    assert beta_factor(1.19, 0.15) == pytest.approx(0.888, abs=1e-3)
    assert beta_factor(0.0, 0.3) == 0.0
    assert beta_factor(0.7, 0.0) == 1.0
    with pytest.raises(ParameterError):
        beta_factor(0.0, 0.0)


def test_beta_factor_monotonicity(rng):
    g = np.sort(rng.uniform(0.01, 5.0, 20))
    betas = [beta_factor(x, 0.2) for x in g]
    assert np.all(np.diff(betas) > 0)
    t = np.sort(rng.uniform(0.01, 5.0, 20))
    betas_t = [beta_factor(1.0, x) for x in t]
    assert np.all(np.diff(betas_t) < 0)
    assert all(0.0 <= b <= 1.0 for b in betas + betas_t)


def test_beta_from_measurement_paper_values():
    assert beta_from_measurement(1.34, 0.15) == pytest.approx(0.888, abs=1e-3)
    assert beta_from_measurement(1.34, 0.15) == pytest.approx(0.89, abs=2e-3)
    assert beta_from_measurement(3.5, 0.4) == pytest.approx(0.886, abs=1e-3)
    with pytest.raises(NotCoupledError):
        beta_from_measurement(0.1, 0.15)


def test_beta_definitions_agree(rng):
    # beta(fast, tot) == Gamma_wg/(Gamma_wg + tot) with Gamma_wg = fast - tot
    for _ in range(30):
        tot = float(rng.uniform(0.01, 1.0))
        fast = tot + float(rng.uniform(0.01, 5.0))
        assert beta_from_measurement(fast, tot) == pytest.approx(
            beta_factor(fast - tot, tot), rel=1e-12)


def test_scaled_frequency_values():
    assert scaled_frequency(256e-9, 981.0e-9) == pytest.approx(0.26096, abs=1e-5)
    assert scaled_frequency(1.0, 1.0) == 1.0
    assert scaled_frequency(248e-9, 943e-9) == pytest.approx(0.263, abs=5e-4)
    with pytest.raises(ParameterError):
        scaled_frequency(0.0, 1.0)


def test_spectrum_diverges_toward_band_edge(w1_mode_small, geom_cal):
    p = EmissionParams(gamma0=1.1, eps=geom_cal.eps_bg, a=geom_cal.a)
    pts = decay_rate_spectrum(w1_mode_small, p, n_points=400)
    freqs = np.array([q.scaled_freq for q in pts])
    gams = np.array([q.gamma_wg for q in pts])
    assert np.all(np.diff(freqs) > 0)
    # the branch terminates at its zone-boundary edge (a frequency minimum in
    # this model); the rate climbs monotonically over the final 1% of the
    # spectral range adjacent to the edge and exceeds 10 Gamma0 at the clamp
    nu_edge = w1_mode_small.nu_edge
    span = freqs.max() - freqs.min()
    near = freqs <= nu_edge + 0.01 * span
    assert near.sum() >= 3
    gams_near = gams[near]
    assert np.all(np.diff(gams_near) < 0)  # increases toward the edge
    assert gams.max() > 10 * p.gamma0


def test_spectrum_attaches_beta(w1_mode_small, geom_cal):
    p = EmissionParams(gamma0=1.1, eps=geom_cal.eps_bg, a=geom_cal.a)
    pts = decay_rate_spectrum(w1_mode_small, p, n_points=50, gamma_tot=0.15)
    assert all(q.beta is not None and 0 <= q.beta <= 1 for q in pts)
    pts2 = decay_rate_spectrum(w1_mode_small, p, n_points=50)
    assert all(q.beta is None for q in pts2)


def test_spectrum_requires_two_samples():
    tiny = WaveguideMode(k_samples=np.array([1.0]), omega=np.array([1e15]),
                         v_g=np.array([1e6]), v_eff=np.array([1e-20]),
                         omega_edge=1e15, localization=np.array([0.9]),
                         a_ref=256e-9)
    p = EmissionParams()
    with pytest.raises(ParameterError):
        decay_rate_spectrum(tiny, p, n_points=10)


def test_emission_point_validation():
    with pytest.raises(ParameterError):
        EmissionPoint(0.26, -1.0)
    with pytest.raises(ParameterError):
        EmissionPoint(0.26, 1.0, beta=1.2)


def test_beta_bandwidth_trivial_cases():
    pts = [EmissionPoint(0.25 + 0.001 * i, 1.0, beta=0.2) for i in range(5)]
    assert beta_bandwidth(pts) == 0.0
    pts[2] = EmissionPoint(pts[2].scaled_freq, 1.0, beta=0.7)
    assert beta_bandwidth(pts) == 0.0  # single qualifying point


def test_beta_bandwidth_two_percent_regime():
    # beta crosses 0.5 exactly at a/lambda = 0.258 and 0.263
    lo, hi = 0.258, 0.263
    x = np.arange(0.2565, 0.2645, 1e-6)
    beta = 0.5 + 0.4 * (x - lo) * (hi - x) / (0.25 * (hi - lo) ** 2)
    pts = [EmissionPoint(float(xx), 1.0, beta=float(np.clip(b, 0.0, 1.0)))
           for xx, b in zip(x, beta)]
    bw = beta_bandwidth(pts, threshold=0.5)
    assert bw == pytest.approx(0.0192, abs=1e-4)
    assert bw == pytest.approx((hi - lo) / (0.5 * (hi + lo)), abs=2e-5)
