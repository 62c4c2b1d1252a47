"""Decay-histogram model, synthesis, Poisson MLE fits, model selection."""

import numpy as np
import pytest
from scipy.special import erf

from pcwkit import (DecayHistogram, DecayModel, ParameterError, expected_counts,
                    fit, load_histogram, reduced_chi2, save_histogram,
                    select_model, synthesize)
from pcwkit.tcspc import REP_PERIOD_75MHZ, _FWHM_TO_SIGMA

T75 = REP_PERIOD_75MHZ


def make_hist(counts, bin_width=50.0, t0=1000.0, rep=T75):
    return DecayHistogram(bin_width=bin_width, counts=np.asarray(counts),
                          t0=t0, rep_period=rep)


def empty_hist(n_bins=266, bin_width=50.0, t0=1000.0, rep=T75):
    return make_hist(np.zeros(n_bins, dtype=int), bin_width, t0, rep)


# ---------------------------------------------------------------------------
# expected_counts


def test_histogram_validation():
    with pytest.raises(ParameterError):
        make_hist([-1, 2, 3])
    with pytest.raises(ParameterError):
        make_hist([1.5, 2.0])
    with pytest.raises(ParameterError):
        make_hist(np.ones(400, dtype=int), bin_width=50.0, rep=10000.0)
    assert make_hist([0, 1, 2]).total_counts == 3


def test_model_validation():
    with pytest.raises(ParameterError):
        DecayModel(kind="tri", rates=(1.0,), amplitudes=(1.0,))
    with pytest.raises(ParameterError):
        DecayModel(kind="bi", rates=(0.1, 1.0), amplitudes=(1.0, 1.0))
    with pytest.raises(ParameterError):
        DecayModel(kind="mono", rates=(-1.0,), amplitudes=(1.0,))
    with pytest.raises(ParameterError):
        DecayModel(kind="mono", rates=(1.0,), amplitudes=(-1.0,))


def test_delta_irf_limit_is_pure_exponential():
    # no IRF, no wraparound regime (Gamma T >> 1), no background: the model
    # equals A exp(-Gamma t) sampled at bin centers
    gamma = 2.0
    model = DecayModel(kind="mono", rates=(gamma,), amplitudes=(1000.0,),
                       background=0.0, irf_fwhm=0.0)
    hist = empty_hist()
    mu = expected_counts(model, hist)
    t = hist.time_ps
    after = t >= hist.t0
    ref = 1000.0 * np.exp(-gamma * 1e-3 * (t[after] - hist.t0))
    np.testing.assert_allclose(mu[after], ref, rtol=1e-9)
    assert np.all(mu[~after] <= 1000.0 * np.exp(-gamma * 1e-3 * (T75 - hist.t0))
                  * (1 + 1e-9))


def test_irf_convolution_preserves_total_counts():
    # over a window commensurate with the period, the binned mass is
    # invariant under the IRF width (convolution preserves mass)
    n, dt = 266, 50.0
    rep = n * dt
    sums = []
    for fwhm in (140.0, 280.0, 560.0):
        model = DecayModel(kind="mono", rates=(0.21,), amplitudes=(500.0,),
                           background=0.0, irf_fwhm=fwhm)
        mu = expected_counts(model, empty_hist(n, dt, 1000.0, rep))
        sums.append(mu.sum())
    assert abs(sums[1] - sums[0]) / sums[0] < 1e-6
    assert abs(sums[2] - sums[0]) / sums[0] < 1e-6


def _brute_force_profile(t_eval, t0, rate_ns, sigma, T, res=1.0):
    """Independent oracle: discrete circular convolution at ~1 ps of the
    bin-averaged periodic exponential with a bin-integrated Gaussian."""
    g = rate_ns * 1e-3
    N = int(round(T / res))
    res = T / N
    s = np.arange(N) * res
    lo = (s - t0 - res / 2.0) % T
    hi = lo + res
    q = np.exp(-g * T)
    dens = (np.exp(-g * lo) - np.exp(-g * hi)) / (g * res) / (1.0 - q)
    wrap = hi > T
    if wrap.any():
        i = np.where(wrap)[0]
        p1 = (np.exp(-g * lo[i]) - q) / (g * res)
        p2 = (1.0 - np.exp(-g * (hi[i] - T))) / (g * res)
        dens[i] = (p1 + p2) / (1.0 - q)
    d = np.minimum(s, T - s)
    gauss = 0.5 * (erf((d + res / 2) / (sigma * np.sqrt(2)))
                   - erf((d - res / 2) / (sigma * np.sqrt(2))))
    conv = np.fft.irfft(np.fft.rfft(dens) * np.fft.rfft(gauss), n=N)
    return np.interp(np.asarray(t_eval) % T, s, conv, period=T)


def test_wraparound_against_brute_force_convolution():
    # slow rate 0.05/ns against a 75 MHz train: heavy pile-up; the value is
    # fixed by a time-domain convolution oracle at 1 ps resolution
    hist = empty_hist()
    sigma = 280.0 * _FWHM_TO_SIGMA
    model = DecayModel(kind="mono", rates=(0.05,), amplitudes=(1.0,),
                       background=0.0, irf_fwhm=280.0)
    mine = expected_counts(model, hist)
    ref = _brute_force_profile(hist.time_ps, hist.t0, 0.05, sigma, T75)
    rel = np.abs(mine - ref) / np.maximum(np.abs(ref), 1e-30)
    assert rel.max() < 1e-4
    # pile-up raises the apparent floor well above the true background (0)
    assert mine.min() > 0.3 * mine.max()


def test_wraparound_brute_force_fast_rate():
    hist = empty_hist()
    sigma = 280.0 * _FWHM_TO_SIGMA
    model = DecayModel(kind="mono", rates=(1.34,), amplitudes=(1.0,),
                       background=0.0, irf_fwhm=280.0)
    mine = expected_counts(model, hist)
    ref = _brute_force_profile(hist.time_ps, hist.t0, 1.34, sigma, T75)
    big = ref > 1e-6 * ref.max()
    rel = np.abs(mine[big] - ref[big]) / ref[big]
    assert rel.max() < 5e-4


def test_expected_counts_translation_covariance():
    # commensurate window: shifting t0 by one bin rolls the profile
    n, dt = 266, 50.0
    rep = n * dt
    model = DecayModel(kind="bi", rates=(1.34, 0.1), amplitudes=(900.0, 80.0),
                       background=3.0, irf_fwhm=280.0)
    mu1 = expected_counts(model, empty_hist(n, dt, 2000.0, rep))
    mu2 = expected_counts(model, empty_hist(n, dt, 2000.0 + dt, rep))
    np.testing.assert_allclose(mu2, np.roll(mu1, 1), rtol=1e-9)


# ---------------------------------------------------------------------------
# synthesize


def test_synthesize_deterministic():
    model = DecayModel(kind="mono", rates=(0.3,), amplitudes=(1.0,),
                       background=0.0)
    h1 = synthesize(model, 50000, seed=42)
    h2 = synthesize(model, 50000, seed=42)
    np.testing.assert_array_equal(h1.counts, h2.counts)
    h3 = synthesize(model, 50000, seed=43)
    assert not np.array_equal(h1.counts, h3.counts)


def test_synthesize_total_counts_statistics():
    model = DecayModel(kind="mono", rates=(0.5,), amplitudes=(1.0,),
                       background=0.5)
    total = 10000
    sums = [synthesize(model, total, seed=s).total_counts for s in range(1000)]
    mean = np.mean(sums)
    tol = 3 * np.sqrt(1000 * total) / 1000
    assert abs(mean - total) <= tol


def test_synthesize_background_only_is_flat():
    model = DecayModel(kind="mono", rates=(1.0,), amplitudes=(0.0,),
                       background=5.0)
    h = synthesize(model, 266 * 100, seed=7)
    mean = h.counts.mean()
    assert abs(mean - 100.0) < 5 * np.sqrt(100.0 / 266) + 1
    # per-bin Poisson fluctuation band around the flat level
    assert h.counts.max() < mean + 6 * np.sqrt(mean)
    assert h.counts.min() > mean - 6 * np.sqrt(mean)


# ---------------------------------------------------------------------------
# fit


def test_fit_preconditions():
    with pytest.raises(ParameterError):
        fit(empty_hist(), "mono")  # all zeros: too few counts
    with pytest.raises(ParameterError):
        fit(make_hist(np.full(30, 100), rep=T75), "mono")  # < 50 bins
    with pytest.raises(ParameterError):
        fit(synthesize(DecayModel(kind="mono", rates=(0.3,), amplitudes=(1.0,)),
                       50000, seed=1), "tri")


def test_fit_recovers_slow_mono_rate():
    # the uncoupled-emitter regime: 0.05/ns against a 13.3 ns period
    model = DecayModel(kind="mono", rates=(0.05,), amplitudes=(1.0,),
                       background=0.0)
    hist = synthesize(model, 50000, seed=11)
    res = fit(hist, "mono")
    assert res.converged
    assert abs(res.model.rates[0] - 0.05) / 0.05 < 0.05


def test_fit_recovers_bi_fast_component():
    model = DecayModel(kind="bi", rates=(1.34, 0.1), amplitudes=(1.0, 0.08),
                       background=0.0)
    hist = synthesize(model, 50000, seed=11)
    res = fit(hist, "bi")
    assert res.converged
    assert abs(res.model.rates[0] - 1.34) / 1.34 < 0.05
    assert res.model.rates[0] > res.model.rates[1]


def test_fit_keeps_background_when_present():
    model = DecayModel(kind="mono", rates=(0.4,), amplitudes=(800.0,),
                       background=6.0)
    hist = synthesize(model, int(sum(expected_counts(model, empty_hist()))),
                      seed=13)
    res = fit(hist, "mono")
    assert not res.background_fixed
    assert res.model.background > 1.0


def test_fit_reparameterization_stable():
    model = DecayModel(kind="mono", rates=(0.7,), amplitudes=(1.0,),
                       background=2.0)
    hist = synthesize(model, 60000, seed=14)
    r_lin = fit(hist, "mono", log_rates=False)
    r_log = fit(hist, "mono", log_rates=True)
    assert abs(r_lin.model.rates[0] - r_log.model.rates[0]) \
        / r_lin.model.rates[0] < 1e-3


def test_fit_likelihood_monotone_over_iterations():
    model = DecayModel(kind="mono", rates=(0.3,), amplitudes=(1.0,))
    hist = synthesize(model, 50000, seed=15)
    res = fit(hist, "mono", track_likelihood=True)
    trace = np.array(res.nll_trace)
    assert len(trace) >= 2
    assert np.all(np.diff(trace) <= 1e-9 * np.abs(trace[:-1]))


def test_fit_uncertainty_positive_and_ordered():
    model = DecayModel(kind="bi", rates=(1.5, 0.12), amplitudes=(1.0, 0.1))
    hist = synthesize(model, 80000, seed=16)
    res = fit(hist, "bi")
    assert res.converged
    assert all(s > 0 for s in res.rate_uncertainties)
    assert len(res.rate_uncertainties) == 2


# ---------------------------------------------------------------------------
# reduced chi^2


def test_chi2_zero_for_exact_expectation():
    model = DecayModel(kind="mono", rates=(1.0,), amplitudes=(0.0,),
                       background=7.0)
    hist = make_hist(np.full(266, 7))
    assert reduced_chi2(hist, model) == 0.0


def test_chi2_undefined_with_too_few_bins():
    model = DecayModel(kind="mono", rates=(1.0,), amplitudes=(0.0,),
                       background=0.05)
    hist = make_hist(np.zeros(60, dtype=int), bin_width=50.0, rep=T75)
    with pytest.raises(ParameterError):
        reduced_chi2(hist, model)  # everything merges into ~1 bin


def test_chi2_near_unity_for_correct_model():
    # correctly specified fits: chi2_red concentrates near 1
    model = DecayModel(kind="mono", rates=(0.3,), amplitudes=(1.0,))
    vals = []
    for s in range(200):
        hist = synthesize(model, 50000, seed=100 + s)
        res = fit(hist, "mono")
        vals.append(res.chi2_red)
    mean = float(np.mean(vals))
    assert 0.9 <= mean <= 1.1


def test_chi2_flags_model_misfit():
    # mono fit of strongly bi-exponential data (rate ratio 27) exceeds the
    # 1.3 escalation threshold in at least 95% of trials
    model = DecayModel(kind="bi", rates=(1.34, 0.05), amplitudes=(1.0, 0.1))
    flagged = 0
    for s in range(100):
        hist = synthesize(model, 50000, seed=300 + s)
        res = fit(hist, "mono")
        if res.chi2_red > 1.3:
            flagged += 1
    assert flagged >= 95


# ---------------------------------------------------------------------------
# model selection


def test_select_model_prefers_mono_on_mono_data():
    model = DecayModel(kind="mono", rates=(0.4,), amplitudes=(1.0,))
    picked_mono = 0
    for s in range(100):
        hist = synthesize(model, 50000, seed=500 + s)
        if select_model(hist).model.kind == "mono":
            picked_mono += 1
    assert picked_mono >= 95


def test_select_model_escalates_on_bi_data():
    # 27:1 rate ratio: mono is always rejected and the bi fast component is
    # typically recovered within 5% (its sampling spread at 5e4 counts is
    # about 3.5%, so a minority of draws legitimately land outside)
    model = DecayModel(kind="bi", rates=(1.34, 0.05), amplitudes=(1.0, 0.1))
    picked_bi = 0
    errs = []
    for s in range(60):
        hist = synthesize(model, 50000, seed=700 + s)
        res = select_model(hist)
        if res.model.kind == "bi":
            picked_bi += 1
            errs.append(abs(res.model.rates[0] - 1.34) / 1.34)
    assert picked_bi >= 58
    errs = np.array(errs)
    assert np.median(errs) < 0.05
    assert (errs < 0.05).sum() >= 48


def test_select_model_degenerate_bi_falls_back_to_mono():
    # nearly equal rates cannot be distinguished: mono is reported
    model = DecayModel(kind="bi", rates=(0.42, 0.40), amplitudes=(0.6, 0.6))
    mono_picked = 0
    for s in range(20):
        hist = synthesize(model, 50000, seed=900 + s)
        if select_model(hist).model.kind == "mono":
            mono_picked += 1
    assert mono_picked >= 18


def test_uncertainty_calibration_covers_truth():
    # the 1-sigma interval from the observed information matrix covers the
    # true rate at roughly the nominal 68% level
    gtrue = 0.3
    model = DecayModel(kind="mono", rates=(gtrue,), amplitudes=(800.0,),
                       background=4.0)
    total = int(sum(expected_counts(model, empty_hist())))
    cover = 0
    for s in range(200):
        hist = synthesize(model, total, seed=1500 + s)
        res = fit(hist, "mono")
        if abs(res.model.rates[0] - gtrue) <= res.rate_uncertainties[0]:
            cover += 1
    assert 0.60 * 200 <= cover <= 0.75 * 200


# ---------------------------------------------------------------------------
# file round trips


def test_histogram_csv_round_trip(tmp_path):
    model = DecayModel(kind="mono", rates=(0.8,), amplitudes=(1.0,),
                       background=1.0)
    hist = synthesize(model, 30000, seed=21)
    meta = {"wavelength_nm": 981.0, "lattice_nm": 256.0, "id": "QD01"}
    path = tmp_path / "qd01.csv"
    save_histogram(hist, path, meta)
    loaded, meta2 = load_histogram(path)
    np.testing.assert_array_equal(loaded.counts, hist.counts)
    assert loaded.bin_width == hist.bin_width
    assert loaded.t0 == hist.t0
    assert loaded.rep_period == hist.rep_period
    assert meta2["wavelength_nm"] == 981.0
    assert meta2["id"] == "QD01"


def test_load_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time_ps,counts\n25,-4\n75,2\n")
    with pytest.raises(ParameterError):
        load_histogram(bad)
    worse = tmp_path / "worse.csv"
    worse.write_text("no,header\n1,2\n")
    with pytest.raises(ParameterError):
        load_histogram(worse)
