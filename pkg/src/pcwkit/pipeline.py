"""Campaign analysis: ingest decay histograms (or synthesize them from a
scenario), fit and classify emitters, estimate beta-factors, run the
first-principles theory chain, and emit reports and figures."""

from __future__ import annotations

import datetime
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import PipelineConfig, config_dict, default_config, to_ini_text
from .dispersion import (GapWindow, WaveguideMode, band_edge, bulk_gap, bulk_k_path,
                         extract_guided_mode, localization_fraction, w1_k_path)
from .emission import (EmissionParams, EmissionPoint, beta_bandwidth,
                       beta_from_measurement, decay_rate_spectrum)
from .errors import (EmptyCampaignError, EstimationError, NotCoupledError,
                     ParameterError, PcwError)
from .geometry import CrystalGeometry, make_bulk_cell, make_w1_supercell, ReciprocalBasis
from .pwe import C_LIGHT, PlaneWaveOperator, reconstruct_field, solve_bands
from .svgplot import SvgFigure
from .tcspc import (DecayFit, DecayHistogram, DecayModel, load_histogram,
                    save_histogram, select_model, synthesize)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmitterRecord:
    """One analyzed emitter line (a point of the rate-vs-frequency scatter)."""

    id: str
    wavelength_nm: float
    lattice_nm: float
    fit: DecayFit
    scaled_freq: float
    coupled: bool = False
    beta: float | None = None
    flags: tuple = ()

    def __post_init__(self):
        expected = self.lattice_nm / self.wavelength_nm
        if abs(self.scaled_freq - expected) > 1e-9 * expected:
            raise ParameterError(
                f"scaled_freq {self.scaled_freq} inconsistent with "
                f"lattice/wavelength = {expected}")
        if self.beta is not None and not self.coupled:
            raise ParameterError("uncoupled records cannot carry a beta value")

    @property
    def rate(self) -> float:
        """Reported decay rate (ns^-1): the fast component of the fit."""
        return self.fit.model.rates[0]


@dataclass(frozen=True)
class TheoryResult:
    """Output of the theory chain for one geometry."""

    curve: tuple                      # EmissionPoints vs scaled frequency
    gap: GapWindow
    nu_edge: float                    # W1 band edge, scaled frequency
    edge_interval: tuple              # (lo, hi) from the lattice uncertainty
    mode: WaveguideMode | None = None


@dataclass(frozen=True)
class CampaignReport:
    records: tuple
    gamma_tot_mean: float | None
    beta_max: float | None
    beta_bandwidth: float
    enhancement_ratio: float | None
    theory: TheoryResult | None
    warnings: tuple
    provenance: dict


@dataclass(frozen=True)
class IngestResult:
    items: tuple                      # (DecayHistogram, metadata dict) pairs
    errors: tuple                     # (filename, message) pairs


def ingest(dir_path) -> IngestResult:
    """Load every CSV+JSON histogram pair under ``dir_path``.

    Malformed files are skipped and reported in the error list; an empty
    directory (or one with no valid files) is an error.
    """
    root = Path(dir_path)
    if not root.is_dir():
        raise OSError(f"not a readable directory: {root}")
    items, errors = [], []
    for csv_path in sorted(root.glob("*.csv")):
        try:
            hist, meta = load_histogram(csv_path)
            meta.setdefault("id", csv_path.stem)
            items.append((hist, meta))
        except (PcwError, ValueError, OSError, json.JSONDecodeError) as exc:
            errors.append((csv_path.name, str(exc)))
    if not items:
        raise EmptyCampaignError(
            f"no valid histogram files in {root} "
            f"({len(errors)} malformed file(s))")
    return IngestResult(items=tuple(items), errors=tuple(errors))


def _otsu_split_log(rates: np.ndarray) -> tuple[int, float]:
    """Best two-cluster split of log-rates: maximize the weighted
    between-cluster separation over all split points.  Returns the split
    index into the sorted array and the geometric-mean ratio of the clusters."""
    logs = np.sort(np.log(rates))
    n = len(logs)
    best_idx, best_score = 0, -np.inf
    for i in range(1, n):
        w0, w1 = i / n, (n - i) / n
        m0, m1 = logs[:i].mean(), logs[i:].mean()
        score = w0 * w1 * (m1 - m0) ** 2
        if score > best_score:
            best_score = score
            best_idx = i
    m0 = logs[:best_idx].mean()
    m1 = logs[best_idx:].mean()
    return best_idx, float(np.exp(m1 - m0))


def classify(records: list[EmitterRecord], threshold="auto",
             fixed_threshold: float = 0.5,
             min_cluster_ratio: float = 3.0
             ) -> tuple[list[EmitterRecord], list[str]]:
    """Mark each record coupled (rate above threshold) or uncoupled.

    ``threshold`` is a rate in ns^-1 or "auto"; auto splits the log-rates
    into two clusters and falls back to the fixed threshold (with a warning)
    when the clusters are closer than ``min_cluster_ratio`` in rate.  The
    auto split depends only on rate ratios, so it is scale invariant.
    """
    warnings = []
    rates = np.array([r.rate for r in records])
    if threshold == "auto":
        if len(rates) >= 2 and np.ptp(np.log(rates)) > 0:
            idx, ratio = _otsu_split_log(rates)
            if ratio >= min_cluster_ratio:
                cut = np.sort(rates)[idx - 1]
                thr = float(cut)  # coupled iff rate > largest low-cluster rate
            else:
                thr = fixed_threshold
                warnings.append(
                    f"auto threshold fell back to {fixed_threshold} ns^-1: "
                    f"rate clusters differ only by x{ratio:.2f}")
        else:
            thr = fixed_threshold
            warnings.append(
                f"auto threshold fell back to {fixed_threshold} ns^-1: "
                "degenerate rate distribution")
    else:
        thr = float(threshold)
    out = [replace(r, coupled=bool(r.rate > thr), beta=None) for r in records]
    for msg in warnings:
        log.warning(msg)
    return out, warnings


def gamma_tot_mean(records: list[EmitterRecord]) -> float:
    """Arithmetic mean of the uncoupled records' reported rates (ns^-1)."""
    rates = [r.rate for r in records if not r.coupled]
    if not rates:
        raise EstimationError(
            "no uncoupled records: the mean total decay rate (and hence beta) "
            "cannot be estimated")
    return float(np.mean(rates))


def beta_spectrum(records: list[EmitterRecord], mean_rate: float
                  ) -> tuple[list[EmitterRecord], list[str]]:
    """Attach beta to every coupled record.

    Coupled records whose rate does not exceed the uncoupled mean cannot
    yield a beta; they are demoted to uncoupled with a flag and a warning.
    """
    out, warnings = [], []
    for r in records:
        if not r.coupled:
            out.append(r)
            continue
        try:
            beta = beta_from_measurement(r.rate, mean_rate)
        except NotCoupledError:
            warnings.append(
                f"record {r.id}: coupled rate {r.rate:.3g} ns^-1 does not "
                f"exceed the uncoupled mean {mean_rate:.3g} ns^-1; skipped")
            out.append(replace(r, coupled=False, beta=None,
                               flags=r.flags + ("beta-skipped",)))
            continue
        out.append(replace(r, beta=beta))
    for msg in warnings:
        log.warning(msg)
    return out, warnings


def _geometry_from_config(cfg: PipelineConfig, a_m: float | None = None
                          ) -> CrystalGeometry:
    g = cfg.geometry
    a_nom = g.a_nm * 1e-9
    a_val = a_nom if a_m is None else a_m
    r_phys = g.r_over_a * a_nom   # fabricated radius is a fixed physical length
    return CrystalGeometry(a=a_val, r=r_phys, eps_bg=g.n_eff**2,
                           eps_hole=g.eps_hole, t_slab=g.t_slab_nm * 1e-9)


def _w1_edge_quick(geom: CrystalGeometry, cfg: PipelineConfig, gap: GapWindow
                   ) -> float:
    """Guided-branch scaled frequency at k = pi/a only (lowest localized
    in-gap band); used for the lattice-uncertainty interval."""
    s = cfg.solver
    cell = make_w1_supercell(geom, s.n_rows)
    basis = ReciprocalBasis.build(cell, s.supercell_cutoff)
    n_bands = min(s.n_rows + s.n_bands_extra, len(basis))
    bs = solve_bands(cell, [[np.pi / geom.a, 0.0]], basis, n_bands,
                     inverse_rule=s.inverse_rule)
    for b in range(n_bands):
        nu = float(bs.bands[0, b])
        if not gap.contains(nu):
            continue
        fld = reconstruct_field(bs, 0, b, grid_resolution=s.grid_resolution)
        if localization_fraction(fld, s.strip_halfwidth_rows) >= \
                s.localization_threshold:
            return nu
    raise PcwError("no localized in-gap band at the zone boundary")


def run_bulk_gap(cfg: PipelineConfig, geom: CrystalGeometry | None = None):
    s = cfg.solver
    if geom is None:
        geom = _geometry_from_config(cfg)
    cell = make_bulk_cell(geom)
    basis = ReciprocalBasis.build(cell, s.bulk_cutoff)
    bs = solve_bands(cell, bulk_k_path(geom.a, s.n_bulk_k_per_segment), basis,
                     n_bands=4, inverse_rule=s.inverse_rule, threads=s.threads)
    return bulk_gap(bs), bs


def run_guided_mode(cfg: PipelineConfig, gap: GapWindow,
                    geom: CrystalGeometry | None = None) -> WaveguideMode:
    s = cfg.solver
    if geom is None:
        geom = _geometry_from_config(cfg)
    cell = make_w1_supercell(geom, s.n_rows)
    basis = ReciprocalBasis.build(cell, s.supercell_cutoff)
    n_bands = min(s.n_rows + s.n_bands_extra, len(basis))
    kpath = w1_k_path(geom.a, s.n_k_uniform, s.n_k_clustered)
    bs = solve_bands(cell, kpath, basis, n_bands, inverse_rule=s.inverse_rule,
                     threads=s.threads)
    return extract_guided_mode(
        bs, gap, localization_threshold=s.localization_threshold,
        strip_halfwidth_rows=s.strip_halfwidth_rows,
        grid_resolution=s.grid_resolution)


def theory_chain(cfg: PipelineConfig, gamma_tot: float | None = None
                 ) -> TheoryResult:
    """Geometry -> bulk gap -> W1 guided mode -> emission spectrum.

    The lattice-parameter uncertainty (a +/- delta at fixed fabricated hole
    radius) is propagated by recomputing the band edge at the interval ends;
    edge positions are mapped back to the nominal scaled-frequency axis.
    """
    geom = _geometry_from_config(cfg)
    gap, _ = run_bulk_gap(cfg, geom)
    mode = run_guided_mode(cfg, gap, geom)
    eps = cfg.emission.eps if cfg.emission.eps is not None else geom.eps_bg
    params = EmissionParams(gamma0=cfg.emission.gamma0_ns, eps=eps, a=geom.a,
                            vg_floor=cfg.vg_floor)
    g_tot = gamma_tot if gamma_tot is not None else cfg.emission.gamma_tot_ns
    curve = decay_rate_spectrum(mode, params, n_points=cfg.emission.n_points,
                                gamma_tot=g_tot)
    nu_edge = mode.nu_edge
    delta = cfg.geometry.a_delta_nm
    if delta > 0:
        a_nom = cfg.geometry.a_nm * 1e-9
        edges = [nu_edge]
        for a_nm in (cfg.geometry.a_nm - delta, cfg.geometry.a_nm + delta):
            geom_d = _geometry_from_config(cfg, a_m=a_nm * 1e-9)
            gap_d, _ = run_bulk_gap(cfg, geom_d)
            nu_d = _w1_edge_quick(geom_d, cfg, gap_d)
            edges.append(nu_d * a_nom / (a_nm * 1e-9))
        interval = (min(edges), max(edges))
    else:
        interval = (nu_edge, nu_edge)
    return TheoryResult(curve=tuple(curve), gap=gap, nu_edge=nu_edge,
                        edge_interval=interval, mode=mode)


def analyze_campaign(input_dir, cfg: PipelineConfig | None = None,
                     run_theory: bool = True, threads: int = 1
                     ) -> CampaignReport:
    """Full campaign analysis over a directory of histogram files."""
    if cfg is None:
        cfg = default_config()
    result = ingest(input_dir)
    warnings = [f"{name}: {msg}" for name, msg in result.errors]

    def fit_one(item):
        hist, meta = item
        fitres = select_model(hist, irf_fwhm=cfg.tcspc.irf_fwhm_ps,
                              chi2_threshold=cfg.tcspc.chi2_threshold)
        wl = float(meta.get("wavelength_nm", 0.0))
        lat = float(meta.get("lattice_nm", cfg.geometry.a_nm))
        if wl <= 0:
            raise ParameterError(f"{meta.get('id')}: missing wavelength_nm")
        return EmitterRecord(id=str(meta.get("id")), wavelength_nm=wl,
                             lattice_nm=lat, fit=fitres,
                             scaled_freq=lat / wl)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(fit_one, result.items))
    else:
        records = [fit_one(item) for item in result.items]

    thr = "auto" if cfg.classify.mode == "auto" else cfg.classify.threshold_ns
    records, cls_warn = classify(records, threshold=thr,
                                 fixed_threshold=cfg.classify.threshold_ns,
                                 min_cluster_ratio=cfg.classify.min_cluster_ratio)
    warnings += cls_warn

    mean_rate = None
    beta_max = None
    enhancement = None
    bw = 0.0
    try:
        mean_rate = gamma_tot_mean(records)
    except EstimationError as exc:
        warnings.append(str(exc))
    if mean_rate is not None:
        records, beta_warn = beta_spectrum(records, mean_rate)
        warnings += beta_warn
        betas = [r.beta for r in records if r.beta is not None]
        if betas:
            beta_max = float(max(betas))
        coupled_rates = [r.rate for r in records if r.coupled]
        if coupled_rates and mean_rate > 0:
            enhancement = float(max(coupled_rates) / mean_rate)
        pts = sorted((EmissionPoint(r.scaled_freq, r.rate, r.beta)
                      for r in records if r.beta is not None),
                     key=lambda q: q.scaled_freq)
        bw = beta_bandwidth(list(pts))

    theory = None
    if run_theory:
        theory = theory_chain(cfg, gamma_tot=mean_rate)

    provenance = {
        "package": "pcwkit",
        "version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "config_ini": to_ini_text(cfg),
        "config": config_dict(cfg),
        "conventions": {
            "v_eff": "per-period, peak-normalized, promoted by t_slab",
            "chi2_bin_min_expected": 5,
            "rates_unit": "ns^-1",
        },
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    return CampaignReport(records=tuple(records), gamma_tot_mean=mean_rate,
                          beta_max=beta_max, beta_bandwidth=bw,
                          enhancement_ratio=enhancement, theory=theory,
                          warnings=tuple(warnings), provenance=provenance)


# ---------------------------------------------------------------------------
# synthetic campaigns

def synth_campaign(scenario: dict, out_dir, seed: int) -> list[Path]:
    """Generate CSV+JSON histogram pairs from a scenario description.

    Scenario keys: lattice_nm, optional binning overrides, and a list of
    emitters ({id, wavelength_nm, kind, rates_ns, amplitude_ratios,
    background, total_counts}).  Each emitter gets an independent child seed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lattice = float(scenario.get("lattice_nm", 256.0))
    bin_width = float(scenario.get("bin_width_ps", 50.0))
    t0 = float(scenario.get("t0_ps", 1000.0))
    rep = float(scenario.get("rep_period_ps", 1e6 / 75.0))
    irf = float(scenario.get("irf_fwhm_ps", 280.0))
    emitters = scenario.get("emitters", [])
    if not emitters:
        raise ParameterError("scenario has no emitters")
    children = np.random.SeedSequence(seed).spawn(len(emitters))
    paths = []
    for em, child in zip(emitters, children):
        kind = em.get("kind", "mono")
        rates = tuple(float(r) for r in em["rates_ns"])
        ratios = tuple(float(x) for x in em.get(
            "amplitude_ratios", (1.0,) * len(rates)))
        model = DecayModel(kind=kind, rates=rates, amplitudes=ratios,
                           background=float(em.get("background", 0.0)),
                           irf_fwhm=irf)
        hist = synthesize(model, int(em.get("total_counts", 50000)), child,
                          bin_width=bin_width, t0=t0, rep_period=rep)
        meta = {
            "id": str(em["id"]),
            "wavelength_nm": float(em["wavelength_nm"]),
            "lattice_nm": lattice,
            "irf_fwhm_ps": irf,
            "true_kind": kind,
            "true_rates_ns": list(rates),
        }
        path = out / f"{em['id']}.csv"
        save_histogram(hist, path, meta)
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# report serialization

def _fit_to_dict(f: DecayFit) -> dict:
    return {
        "model": {
            "kind": f.model.kind,
            "rates_ns": list(f.model.rates),
            "amplitudes": list(f.model.amplitudes),
            "background": f.model.background,
            "irf_fwhm_ps": f.model.irf_fwhm,
        },
        "chi2_red": f.chi2_red,
        "rate_uncertainties_ns": list(f.rate_uncertainties),
        "converged": f.converged,
        "n_iterations": f.n_iterations,
        "nll": f.nll,
        "n_free_params": f.n_free_params,
        "background_fixed": f.background_fixed,
        "degenerate": f.degenerate,
    }


def _fit_from_dict(d: dict) -> DecayFit:
    m = d["model"]
    model = DecayModel(kind=m["kind"], rates=tuple(m["rates_ns"]),
                       amplitudes=tuple(m["amplitudes"]),
                       background=m["background"], irf_fwhm=m["irf_fwhm_ps"])
    return DecayFit(model=model, chi2_red=d["chi2_red"],
                    rate_uncertainties=tuple(d["rate_uncertainties_ns"]),
                    converged=d["converged"], n_iterations=d["n_iterations"],
                    nll=d["nll"], n_free_params=d["n_free_params"],
                    background_fixed=d["background_fixed"],
                    degenerate=d["degenerate"])


def report_to_dict(report: CampaignReport) -> dict:
    out = {
        "records": [
            {
                "id": r.id,
                "wavelength_nm": r.wavelength_nm,
                "lattice_nm": r.lattice_nm,
                "scaled_freq": r.scaled_freq,
                "coupled": r.coupled,
                "beta": r.beta,
                "flags": list(r.flags),
                "fit": _fit_to_dict(r.fit),
            }
            for r in report.records
        ],
        "gamma_tot_mean_ns": report.gamma_tot_mean,
        "beta_max": report.beta_max,
        "beta_bandwidth": report.beta_bandwidth,
        "enhancement_ratio": report.enhancement_ratio,
        "warnings": list(report.warnings),
        "provenance": report.provenance,
        "theory": None,
    }
    if report.theory is not None:
        t = report.theory
        out["theory"] = {
            "gap": {"nu_low": t.gap.nu_low, "nu_high": t.gap.nu_high},
            "nu_edge": t.nu_edge,
            "edge_interval": list(t.edge_interval),
            "curve": [{"scaled_freq": q.scaled_freq, "gamma_wg_ns": q.gamma_wg,
                       "beta": q.beta} for q in t.curve],
        }
    return out


def report_from_dict(d: dict) -> CampaignReport:
    records = tuple(
        EmitterRecord(id=rd["id"], wavelength_nm=rd["wavelength_nm"],
                      lattice_nm=rd["lattice_nm"], fit=_fit_from_dict(rd["fit"]),
                      scaled_freq=rd["scaled_freq"], coupled=rd["coupled"],
                      beta=rd["beta"], flags=tuple(rd["flags"]))
        for rd in d["records"])
    theory = None
    if d.get("theory") is not None:
        td = d["theory"]
        curve = tuple(EmissionPoint(q["scaled_freq"], q["gamma_wg_ns"], q["beta"])
                      for q in td["curve"])
        theory = TheoryResult(curve=curve,
                              gap=GapWindow(td["gap"]["nu_low"], td["gap"]["nu_high"]),
                              nu_edge=td["nu_edge"],
                              edge_interval=tuple(td["edge_interval"]), mode=None)
    return CampaignReport(records=records, gamma_tot_mean=d["gamma_tot_mean_ns"],
                          beta_max=d["beta_max"], beta_bandwidth=d["beta_bandwidth"],
                          enhancement_ratio=d["enhancement_ratio"], theory=theory,
                          warnings=tuple(d["warnings"]), provenance=d["provenance"])


def load_report(path) -> CampaignReport:
    with open(path) as fh:
        return report_from_dict(json.load(fh))


def emit_report(report: CampaignReport, out_dir) -> dict:
    """Write report.json, rates.csv, theory.csv and the SVG figures."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = {}
        jpath = out / "report.json"
        with open(jpath, "w") as fh:
            json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
            fh.write("\n")
        files["report"] = jpath

        rpath = out / "rates.csv"
        with open(rpath, "w") as fh:
            fh.write("id,scaled_freq,rate_ns,rate_sigma_ns,model,chi2_red,"
                     "coupled,beta\n")
            for r in report.records:
                beta = "" if r.beta is None else f"{r.beta:.6g}"
                fh.write(f"{r.id},{r.scaled_freq:.8g},{r.rate:.8g},"
                         f"{r.fit.rate_uncertainties[0]:.6g},{r.fit.model.kind},"
                         f"{r.fit.chi2_red:.6g},{int(r.coupled)},{beta}\n")
        files["rates"] = rpath

        if report.theory is not None:
            tpath = out / "theory.csv"
            with open(tpath, "w") as fh:
                fh.write("scaled_freq,gamma_wg_ns,beta\n")
                for q in report.theory.curve:
                    beta = "" if q.beta is None else f"{q.beta:.8g}"
                    fh.write(f"{q.scaled_freq:.10g},{q.gamma_wg:.8g},{beta}\n")
            files["theory"] = tpath

        files["rates_svg"] = _rates_figure(report, out / "rates_vs_frequency.svg")
        files["beta_svg"] = _beta_figure(report, out / "beta_vs_frequency.svg")
        return files
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc


def _rates_figure(report: CampaignReport, path) -> Path:
    fig = SvgFigure()
    xs = [r.scaled_freq for r in report.records]
    ys = [r.rate for r in report.records]
    tx, ty = [], []
    if report.theory is not None:
        tx = [q.scaled_freq for q in report.theory.curve]
        ty = [q.gamma_wg for q in report.theory.curve]
    all_x = xs + tx
    all_y = ys + [y for y in ty]
    x0, x1 = (min(all_x), max(all_x)) if all_x else (0.0, 1.0)
    pad = 0.03 * (x1 - x0 or 1.0)
    ymax = max(all_y) if all_y else 1.0
    fig.set_limits((x0 - pad, x1 + pad), (0.0, 1.05 * ymax))
    fig.axes("scaled frequency a/lambda", "decay rate (1/ns)",
             title="measured rates and calculated waveguide rate")
    if report.theory is not None:
        lo, hi = report.theory.edge_interval
        if hi > lo:
            fig.band(lo, hi)
        fig.vline(report.theory.gap.nu_low, color="black")
        fig.polyline(tx, ty, color="crimson")
    if report.gamma_tot_mean is not None:
        fig.hline(report.gamma_tot_mean, color="green")
    for r in report.records:
        kind = "square" if r.fit.model.kind == "mono" else "circle"
        color = "steelblue" if r.coupled else "gray"
        fig.marker(r.scaled_freq, r.rate, kind=kind, color=color)
    fig.write(path)
    return Path(path)


def _beta_figure(report: CampaignReport, path) -> Path:
    fig = SvgFigure()
    pts = [(r.scaled_freq, r.beta) for r in report.records if r.beta is not None]
    tx, ty = [], []
    if report.theory is not None:
        curve = [(q.scaled_freq, q.beta) for q in report.theory.curve
                 if q.beta is not None]
        tx = [p[0] for p in curve]
        ty = [p[1] for p in curve]
    all_x = [p[0] for p in pts] + tx
    x0, x1 = (min(all_x), max(all_x)) if all_x else (0.0, 1.0)
    pad = 0.03 * (x1 - x0 or 1.0)
    fig.set_limits((x0 - pad, x1 + pad), (0.0, 1.0))
    fig.axes("scaled frequency a/lambda", "beta factor",
             title="beta vs scaled frequency")
    fig.hline(0.5, color="gray")
    if tx:
        fig.polyline(tx, ty, color="crimson")
    for x, b in pts:
        fig.marker(x, b, kind="circle", color="green")
    fig.write(path)
    return Path(path)
