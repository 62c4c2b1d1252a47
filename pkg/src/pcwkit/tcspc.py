"""Time-correlated single-photon-counting decay modeling and fitting.

Decay histograms are modeled as mono- or bi-exponential decays convolved
with a Gaussian instrument response, wrapped periodically over the laser
repetition period (slow components fold into later periods), on top of a
constant background.  Fits are Poisson maximum-likelihood; the reduced
chi-squared is kept purely as the model-selection statistic, escalating
from a single to a double exponential when it exceeds 1.3.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize, nnls
from scipy.special import erfcx

from .errors import FitFailureError, ParameterError

REP_PERIOD_75MHZ = 1e6 / 75.0          # ps
DEFAULT_IRF_FWHM = 280.0               # ps, detection-chain temporal resolution
DEFAULT_BIN_WIDTH = 50.0               # ps
DEFAULT_T0 = 1000.0                    # ps
CHI2_ESCALATION_THRESHOLD = 1.3
DEGENERATE_RATE_TOL = 0.05
# Keep the background free only when the likelihood-ratio statistic clears the
# 90th percentile of the boundary null (0.5 delta0 + 0.5 chi2_1); the wrapped
# slow-decay shape is otherwise statistically degenerate with a flat offset.
LRT_BACKGROUND_THRESHOLD = 2.71
_FWHM_TO_SIGMA = 1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0)))
_SQRT2 = np.sqrt(2.0)
_TAIL_CUTOFF = 27.631021115928547      # ln(1e12): wrap tail below 1e-12 relative
RATE_BOUNDS = (1e-4, 100.0)            # ns^-1


@dataclass(frozen=True)
class DecayHistogram:
    """Binned photon arrival times relative to the excitation pulse train.

    counts[i] covers [i, i+1) * bin_width (ps); t0 is the excitation time
    within the window; rep_period the laser period.
    """

    bin_width: float
    counts: np.ndarray
    t0: float = DEFAULT_T0
    rep_period: float = REP_PERIOD_75MHZ

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or len(counts) == 0:
            raise ParameterError("counts must be a non-empty 1D array")
        if np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise ParameterError("counts must be non-negative integers")
        arr = counts.astype(np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)
        if not self.bin_width > 0:
            raise ParameterError(f"bin width must be positive, got {self.bin_width}")
        if len(arr) * self.bin_width > self.rep_period * (1 + 1e-9):
            raise ParameterError(
                f"histogram window {len(arr) * self.bin_width} ps exceeds the "
                f"repetition period {self.rep_period} ps")

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def time_ps(self) -> np.ndarray:
        """Bin centers (ps)."""
        return (np.arange(self.n_bins) + 0.5) * self.bin_width

    @property
    def total_counts(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class DecayModel:
    """Mono- or bi-exponential decay model parameters.

    rates in ns^-1 (fast first for bi), amplitudes in counts per bin at the
    excitation time, background in counts per bin, irf_fwhm in ps.
    """

    kind: str
    rates: tuple
    amplitudes: tuple
    background: float = 0.0
    irf_fwhm: float = DEFAULT_IRF_FWHM

    def __post_init__(self):
        if self.kind not in ("mono", "bi"):
            raise ParameterError(f"kind must be 'mono' or 'bi', got {self.kind!r}")
        n = 1 if self.kind == "mono" else 2
        rates = tuple(float(r) for r in self.rates)
        amps = tuple(float(a) for a in self.amplitudes)
        if len(rates) != n or len(amps) != n:
            raise ParameterError(
                f"{self.kind} model needs {n} rate(s) and amplitude(s)")
        if any(r <= 0 for r in rates):
            raise ParameterError(f"rates must be positive, got {rates}")
        if self.kind == "bi" and not rates[0] > rates[1]:
            raise ParameterError(
                f"bi model requires fast > slow rate, got {rates}")
        if any(a < 0 for a in amps):
            raise ParameterError(f"amplitudes must be >= 0, got {amps}")
        if self.background < 0:
            raise ParameterError(f"background must be >= 0, got {self.background}")
        if self.irf_fwhm < 0:
            raise ParameterError(f"irf_fwhm must be >= 0, got {self.irf_fwhm}")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def irf_sigma(self) -> float:
        return self.irf_fwhm * _FWHM_TO_SIGMA


@dataclass(frozen=True)
class DecayFit:
    """Result of a maximum-likelihood decay fit."""

    model: DecayModel
    chi2_red: float
    rate_uncertainties: tuple
    converged: bool
    n_iterations: int
    nll: float
    n_free_params: int
    background_fixed: bool = False
    degenerate: bool = False
    nll_trace: tuple = ()


def _emg(tau: np.ndarray, g_ps: float, sigma: float) -> np.ndarray:
    """Unit step-exponential convolved with a Gaussian of width sigma.

    Evaluated as 0.5 erfcx(v) exp(-tau^2/(2 sigma^2)) with
    v = (g sigma^2 - tau)/(sigma sqrt2), switching to the asymptotic
    exp(g^2 sigma^2/2 - g tau) branch where erfc saturates at 2.
    """
    if sigma <= 0.0:
        return np.where(tau >= 0.0, np.exp(-g_ps * np.maximum(tau, 0.0)), 0.0)
    v = (g_ps * sigma * sigma - tau) / (sigma * _SQRT2)
    out = np.empty(tau.shape, dtype=float)
    asym = v < -6.0
    if asym.any():
        out[asym] = np.exp(np.minimum(
            g_ps * g_ps * sigma * sigma / 2.0 - g_ps * tau[asym], 700.0))
    rest = ~asym
    if rest.any():
        out[rest] = 0.5 * erfcx(v[rest]) * np.exp(
            -tau[rest] ** 2 / (2.0 * sigma * sigma))
    return out


def _demg_dg(tau: np.ndarray, g_ps: float, sigma: float,
             emg_val: np.ndarray) -> np.ndarray:
    if sigma <= 0.0:
        return -tau * emg_val
    gauss = np.exp(-tau ** 2 / (2.0 * sigma * sigma))
    return (g_ps * sigma * sigma - tau) * emg_val - sigma / np.sqrt(2.0 * np.pi) * gauss


def _wrapped_kernel(t: np.ndarray, t0: float, rate_ns: float, sigma: float,
                    rep_period: float, grad: bool = False):
    """Periodic pile-up of the IRF-convolved decay, unit amplitude.

    The n = 0 pulse uses the exact convolution kernel; earlier pulses are all
    in the asymptotic regime whenever tau + T clears the IRF support, so
    their geometric sum has a closed form (tail below 1e-12 handled exactly).
    Falls back to explicit summation otherwise.
    """
    g = rate_ns * 1e-3  # per ps
    tau = t - t0
    T = rep_period
    asym_edge = g * sigma * sigma + 6.0 * _SQRT2 * sigma
    e0 = _emg(tau, g, sigma)
    if tau.min() + T > asym_edge:
        q = np.exp(-g * T)
        tail = np.exp(g * g * sigma * sigma / 2.0 - g * (tau + T)) / (1.0 - q)
        prof = e0 + tail
        if not grad:
            return prof, None
        d0 = _demg_dg(tau, g, sigma, e0)
        dtail = tail * (g * sigma * sigma - tau - T - T * q / (1.0 - q))
        return prof, (d0 + dtail) * 1e-3
    # explicit wrap sum, stopping when the relative tail is below 1e-12
    nmax = int(np.ceil(_TAIL_CUTOFF / (g * T))) + 1
    prof = e0.copy()
    dprof = _demg_dg(tau, g, sigma, e0) if grad else None
    for n in range(1, nmax + 1):
        tn = tau + n * T
        en = _emg(tn, g, sigma)
        prof += en
        if grad:
            dprof += _demg_dg(tn, g, sigma, en)
    return prof, (dprof * 1e-3 if grad else None)


def expected_counts(model: DecayModel, hist: DecayHistogram) -> np.ndarray:
    """Model counts per bin, evaluated at bin centers."""
    t = hist.time_ps
    mu = np.full(hist.n_bins, float(model.background))
    for amp, rate in zip(model.amplitudes, model.rates):
        prof, _ = _wrapped_kernel(t, hist.t0, rate, model.irf_sigma,
                                  hist.rep_period)
        mu += amp * prof
    return mu


def synthesize(model: DecayModel, total_counts: int, seed: int,
               n_bins: int | None = None,
               bin_width: float = DEFAULT_BIN_WIDTH,
               t0: float = DEFAULT_T0,
               rep_period: float = REP_PERIOD_75MHZ) -> DecayHistogram:
    """Poisson draw of a synthetic histogram, scaled so E[sum] = total_counts."""
    if total_counts <= 0:
        raise ParameterError(f"total_counts must be positive, got {total_counts}")
    if n_bins is None:
        n_bins = int(rep_period // bin_width)
    shape = DecayHistogram(bin_width=bin_width, counts=np.zeros(n_bins, dtype=int),
                           t0=t0, rep_period=rep_period)
    mu = expected_counts(model, shape)
    lam = mu * (total_counts / mu.sum())
    rng = np.random.default_rng(seed)
    return replace(shape, counts=rng.poisson(lam))


def _nll_value_grad(x: np.ndarray, counts: np.ndarray, t: np.ndarray,
                    t0: float, sigma: float, T: float, log_rates: bool):
    """Poisson negative log likelihood (dropping the ln k! constant)."""
    ncomp = (len(x) - 1) // 2
    mu = np.full(t.shape, x[-1])
    parts = []
    for i in range(ncomp):
        amp = x[2 * i]
        rate = np.exp(x[2 * i + 1]) if log_rates else x[2 * i + 1]
        prof, dprof = _wrapped_kernel(t, t0, rate, sigma, T, grad=True)
        mu += amp * prof
        parts.append((amp, rate, prof, dprof))
    mu = np.maximum(mu, 1e-300)
    f = float(np.sum(mu - counts * np.log(mu)))
    w = 1.0 - counts / mu
    grad = np.empty_like(x)
    for i, (amp, rate, prof, dprof) in enumerate(parts):
        grad[2 * i] = np.sum(w * prof)
        dg = np.sum(w * amp * dprof)
        grad[2 * i + 1] = dg * rate if log_rates else dg
    grad[-1] = np.sum(w)
    return f, grad


def _initial_guesses(hist: DecayHistogram, sigma: float, kind: str) -> list[list[float]]:
    """Deterministic starts: background from the tail, rates from log-linear
    regression on early/late windows, amplitudes from a non-negative linear
    solve given the rates."""
    counts = hist.counts.astype(float)
    t = hist.time_ps
    n = hist.n_bins
    bg_tail = float(np.median(counts[int(0.9 * n):]))
    pk = int(np.argmax(counts))
    y = np.maximum(counts - bg_tail, 0.5)
    i0 = min(pk + max(3, int(2.5 * sigma / hist.bin_width)), n - 12)
    i1 = min(i0 + 30, n)
    g_fast = float(np.clip(-np.polyfit(t[i0:i1], np.log(y[i0:i1]), 1)[0] * 1e3,
                           RATE_BOUNDS[0] * 2, RATE_BOUNDS[1] / 2))
    j0, j1 = int(0.55 * n), int(0.97 * n)
    g_slow = float(np.clip(-np.polyfit(t[j0:j1],
                                       np.log(np.maximum(counts[j0:j1], 0.5)),
                                       1)[0] * 1e3,
                           RATE_BOUNDS[0] * 2, RATE_BOUNDS[1] / 2))
    if kind == "mono":
        rate_sets = [[g_fast], [max(g_slow, RATE_BOUNDS[0] * 2)],
                     [0.5 * (g_fast + g_slow)]]
    else:
        s1 = g_slow if g_slow < 0.8 * g_fast else g_fast / 10.0
        rate_sets = [[g_fast, s1], [g_fast, g_fast / 10.0]]
    guesses = []
    for rates in rate_sets:
        cols = [_wrapped_kernel(t, hist.t0, r, sigma, hist.rep_period)[0]
                for r in rates]
        cols.append(np.ones_like(t))
        sol, _ = nnls(np.stack(cols, axis=1), counts)
        x0 = []
        for amp, rate in zip(sol[:-1], rates):
            x0 += [max(amp, 1e-3), rate]
        x0.append(max(sol[-1], 0.0))
        guesses.append(x0)
    return guesses


def _minimize_nll(hist: DecayHistogram, sigma: float, x0: np.ndarray,
                  fix_background: bool, log_rates: bool,
                  track: bool = False):
    counts = hist.counts.astype(float)
    t = hist.time_ps
    args = (counts, t, hist.t0, sigma, hist.rep_period, log_rates)
    x0 = np.asarray(x0, dtype=float).copy()
    bounds = []
    for i in range((len(x0) - 1) // 2):
        bounds.append((0.0, None))
        if log_rates:
            x0[2 * i + 1] = np.log(x0[2 * i + 1])
            bounds.append((np.log(RATE_BOUNDS[0]), np.log(RATE_BOUNDS[1])))
        else:
            bounds.append(RATE_BOUNDS)
    if fix_background:
        x0[-1] = 0.0
        bounds.append((0.0, 0.0))
    else:
        bounds.append((0.0, None))
    trace = []
    callback = None
    if track:
        def callback(xk):
            trace.append(_nll_value_grad(xk, *args)[0])
    res = minimize(_nll_value_grad, x0, args=args, jac=True, method="L-BFGS-B",
                   bounds=bounds, callback=callback,
                   options=dict(maxiter=2000, ftol=1e-14, gtol=1e-8))
    return res, trace


def _observed_information_sigmas(hist, sigma, x, fix_background, log_rates):
    """1-sigma rate uncertainties from the observed information matrix
    (central finite-difference Hessian of the NLL at the optimum)."""
    counts = hist.counts.astype(float)
    t = hist.time_ps
    args = (counts, t, hist.t0, sigma, hist.rep_period, log_rates)
    free = list(range(len(x) - 1)) + ([] if fix_background else [len(x) - 1])
    k = len(free)
    H = np.zeros((k, k))
    steps = [1e-4 * max(abs(x[j]), 1e-2) for j in free]

    def f_at(xv):
        return _nll_value_grad(xv, *args)[0]

    for a in range(k):
        for b in range(a, k):
            ja, jb = free[a], free[b]
            pp = x.copy(); pp[ja] += steps[a]; pp[jb] += steps[b]
            pm = x.copy(); pm[ja] += steps[a]; pm[jb] -= steps[b]
            mp = x.copy(); mp[ja] -= steps[a]; mp[jb] += steps[b]
            mm = x.copy(); mm[ja] -= steps[a]; mm[jb] -= steps[b]
            H[a, b] = H[b, a] = (f_at(pp) - f_at(pm) - f_at(mp) + f_at(mm)) / (
                4.0 * steps[a] * steps[b])
    ncomp = (len(x) - 1) // 2
    sigmas = []
    try:
        cov = np.linalg.inv(H)
        diag = np.diag(cov)
        for i in range(ncomp):
            pos = free.index(2 * i + 1)
            var = diag[pos]
            if var <= 0 or not np.isfinite(var):
                return None
            s = np.sqrt(var)
            if log_rates:
                rate = np.exp(x[2 * i + 1])
                s = s * rate
            sigmas.append(float(s))
    except np.linalg.LinAlgError:
        return None
    return tuple(sigmas)


def reduced_chi2(hist: DecayHistogram, model: DecayModel,
                 n_free_params: int | None = None) -> float:
    """Pearson chi^2 per degree of freedom against the model expectation.

    Sparse bins are merged with right neighbors until each merged bin has
    expected counts >= 5; p defaults to the full parameter count of the
    model kind (3 for mono, 5 for bi).
    """
    mu = expected_counts(model, hist)
    merged_c, merged_e = [], []
    acc_c, acc_e = 0.0, 0.0
    for c, e in zip(hist.counts, mu):
        acc_c += c
        acc_e += e
        if acc_e >= 5.0:
            merged_c.append(acc_c)
            merged_e.append(acc_e)
            acc_c, acc_e = 0.0, 0.0
    if acc_e > 0 and merged_e:
        merged_c[-1] += acc_c
        merged_e[-1] += acc_e
    p = n_free_params if n_free_params is not None else (
        3 if model.kind == "mono" else 5)
    n_used = len(merged_e)
    if n_used <= p:
        raise ParameterError(
            f"chi2 undefined: {n_used} usable bins <= {p} free parameters")
    c_arr = np.asarray(merged_c)
    e_arr = np.asarray(merged_e)
    chi2 = float(np.sum((c_arr - e_arr) ** 2 / np.maximum(e_arr, 1.0)))
    return chi2 / (n_used - p)


def _check_fit_preconditions(hist: DecayHistogram):
    if hist.n_bins < 50:
        raise ParameterError(
            f"histogram too short for fitting: {hist.n_bins} bins < 50")
    if hist.total_counts < 1000:
        raise ParameterError(
            f"too few counts for fitting: {hist.total_counts} < 1000")


def fit(hist: DecayHistogram, kind: str, irf_fwhm: float = DEFAULT_IRF_FWHM,
        fix_background: bool | None = None, log_rates: bool = False,
        track_likelihood: bool = False,
        lrt_threshold: float = LRT_BACKGROUND_THRESHOLD) -> DecayFit:
    """Poisson maximum-likelihood fit of a mono or bi exponential model.

    The background is kept as a free parameter only when the likelihood
    ratio against the background-free fit clears ``lrt_threshold`` (pass
    ``fix_background`` to force either choice).  Rates can be optimized in
    log space; the optimum is reparameterization invariant.
    """
    if kind not in ("mono", "bi"):
        raise ParameterError(f"kind must be 'mono' or 'bi', got {kind!r}")
    _check_fit_preconditions(hist)
    sigma = irf_fwhm * _FWHM_TO_SIGMA
    guesses = _initial_guesses(hist, sigma, kind)

    def best_fit(fix_bg):
        best = None
        trace = ()
        for x0 in guesses:
            res, tr = _minimize_nll(hist, sigma, x0, fix_bg, log_rates,
                                    track=track_likelihood)
            if best is None or res.fun < best.fun:
                best = res
                trace = tuple(tr)
        return best, trace

    if fix_background is None:
        res_fix, trace_fix = best_fit(True)
        res_free, trace_free = best_fit(False)
        if 2.0 * (res_fix.fun - res_free.fun) > lrt_threshold:
            res, trace, bg_fixed = res_free, trace_free, False
        else:
            res, trace, bg_fixed = res_fix, trace_fix, True
    else:
        res, trace = best_fit(fix_background)
        bg_fixed = fix_background

    if not np.all(np.isfinite(res.x)):
        raise FitFailureError(f"optimizer returned non-finite parameters: {res}")

    x = res.x.copy()
    ncomp = 1 if kind == "mono" else 2
    amps = [x[2 * i] for i in range(ncomp)]
    rates = [np.exp(x[2 * i + 1]) if log_rates else x[2 * i + 1]
             for i in range(ncomp)]
    sigmas = _observed_information_sigmas(hist, sigma, x, bg_fixed, log_rates)
    degenerate = False
    if kind == "bi":
        order = np.argsort(rates)[::-1]
        rates = [rates[i] for i in order]
        amps = [amps[i] for i in order]
        if sigmas is not None:
            sigmas = tuple(sigmas[i] for i in order)
        if rates[0] > 0 and abs(rates[0] - rates[1]) < DEGENERATE_RATE_TOL * rates[0]:
            degenerate = True
        if rates[0] <= rates[1]:
            rates[0] = rates[1] * (1 + 1e-9)
            degenerate = True
    model = DecayModel(kind=kind, rates=tuple(rates), amplitudes=tuple(amps),
                       background=float(x[-1]), irf_fwhm=irf_fwhm)
    n_free = 2 * ncomp + (0 if bg_fixed else 1)
    chi2 = reduced_chi2(hist, model, n_free_params=n_free)
    converged = bool(res.success) and sigmas is not None
    if sigmas is None:
        sigmas = tuple(float("nan") for _ in range(ncomp))
    return DecayFit(model=model, chi2_red=chi2, rate_uncertainties=sigmas,
                    converged=converged, n_iterations=int(res.nit), nll=float(res.fun),
                    n_free_params=n_free, background_fixed=bg_fixed,
                    degenerate=degenerate, nll_trace=trace)


def select_model(hist: DecayHistogram, irf_fwhm: float = DEFAULT_IRF_FWHM,
                 chi2_threshold: float = CHI2_ESCALATION_THRESHOLD) -> DecayFit:
    """Fit mono first; escalate to bi when the reduced chi^2 exceeds the
    threshold, falling back to mono if the bi fit is degenerate or fails."""
    mono = fit(hist, "mono", irf_fwhm=irf_fwhm)
    if mono.chi2_red <= chi2_threshold:
        return mono
    try:
        bi = fit(hist, "bi", irf_fwhm=irf_fwhm)
    except (FitFailureError, ParameterError):
        return mono
    if bi.degenerate:
        return mono
    return bi


def reported_rate(fit_result: DecayFit) -> float:
    """The rate quoted for an emitter: the (fast) component of its fit."""
    return fit_result.model.rates[0]


def save_histogram(hist: DecayHistogram, csv_path, metadata: dict | None = None):
    """Write the CSV (time_ps, counts) plus its JSON metadata sidecar."""
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_ps", "counts"])
        for tc, c in zip(hist.time_ps, hist.counts):
            w.writerow([f"{tc:.6g}", int(c)])
    meta = {
        "bin_width_ps": hist.bin_width,
        "t0_ps": hist.t0,
        "rep_period_ps": hist.rep_period,
        "irf_fwhm_ps": DEFAULT_IRF_FWHM,
    }
    if metadata:
        meta.update(metadata)
    with open(csv_path.with_suffix(".json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_histogram(csv_path) -> tuple[DecayHistogram, dict]:
    """Read a histogram CSV and its metadata sidecar."""
    csv_path = Path(csv_path)
    times, counts = [], []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["time_ps", "counts"]:
            raise ParameterError(
                f"{csv_path.name}: expected header 'time_ps,counts', got {header}")
        for row in reader:
            if not row:
                continue
            times.append(float(row[0]))
            counts.append(float(row[1]))
    if len(times) < 2:
        raise ParameterError(f"{csv_path.name}: too few rows")
    times = np.asarray(times)
    dt = np.diff(times)
    if np.max(np.abs(dt - dt[0])) > 1e-6 * dt[0]:
        raise ParameterError(f"{csv_path.name}: time bins are not uniform")
    counts = np.asarray(counts)
    if np.any(counts < 0) or np.any(np.mod(counts, 1) != 0):
        raise ParameterError(f"{csv_path.name}: counts must be non-negative integers")
    meta_path = csv_path.with_suffix(".json")
    meta = {}
    if meta_path.exists():
        with open(meta_path) as fh:
            meta = json.load(fh)
    bin_width = float(meta.get("bin_width_ps", dt[0]))
    hist = DecayHistogram(
        bin_width=bin_width, counts=counts.astype(np.int64),
        t0=float(meta.get("t0_ps", DEFAULT_T0)),
        rep_period=float(meta.get("rep_period_ps", REP_PERIOD_75MHZ)))
    return hist, meta
