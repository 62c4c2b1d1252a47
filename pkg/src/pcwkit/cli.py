"""Command-line interface.

Subcommands: bands (band structures to CSV), emission (theory curve),
synth (synthetic campaign from a scenario file), fit (single histogram),
analyze (full campaign report).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import default_config, load_config
from .dispersion import bulk_k_path, w1_k_path
from .errors import PcwError
from .geometry import ReciprocalBasis, make_bulk_cell, make_w1_supercell
from .pipeline import (_fit_to_dict, _geometry_from_config, analyze_campaign,
                       emit_report, synth_campaign, theory_chain)
from .pwe import solve_bands
from .tcspc import load_histogram, select_model


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, default=None,
                   help="INI config file overriding the defaults")
    p.add_argument("--out", type=Path, default=Path("."),
                   help="output directory")
    p.add_argument("--seed", type=int, default=1,
                   help="random seed for synthetic data")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for k-points / histogram fits")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pcwkit",
        description="Photonic-crystal waveguide emission modeling and "
                    "decay-curve analysis")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bands", help="bulk and W1 band structures to CSV")
    _add_common(b)

    e = sub.add_parser("emission", help="theory decay-rate curve to CSV")
    _add_common(e)

    s = sub.add_parser("synth", help="generate a synthetic campaign")
    _add_common(s)
    s.add_argument("--scenario", type=Path, required=True,
                   help="JSON scenario file")

    f = sub.add_parser("fit", help="fit a single histogram CSV")
    _add_common(f)
    f.add_argument("--input", type=Path, required=True, help="histogram CSV")

    a = sub.add_parser("analyze", help="analyze a campaign directory")
    _add_common(a)
    a.add_argument("--input", type=Path, required=True,
                   help="directory of histogram CSV+JSON pairs")
    a.add_argument("--no-theory", action="store_true",
                   help="skip the band-structure theory chain")
    return p


def _load_cfg(args):
    cfg = load_config(args.config) if args.config else default_config()
    if args.threads and args.threads != cfg.solver.threads:
        cfg = replace(cfg, solver=replace(cfg.solver, threads=args.threads))
    return cfg


def cmd_bands(args) -> int:
    cfg = _load_cfg(args)
    geom = _geometry_from_config(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    s = cfg.solver

    cell = make_bulk_cell(geom)
    basis = ReciprocalBasis.build(cell, s.bulk_cutoff)
    bs = solve_bands(cell, bulk_k_path(geom.a, s.n_bulk_k_per_segment), basis,
                     n_bands=6, inverse_rule=s.inverse_rule, threads=s.threads)
    bs.to_csv(args.out / "bands_bulk.csv")

    w1 = make_w1_supercell(geom, s.n_rows)
    basis_w1 = ReciprocalBasis.build(w1, s.supercell_cutoff)
    n_bands = min(s.n_rows + s.n_bands_extra, len(basis_w1))
    bs_w1 = solve_bands(w1, w1_k_path(geom.a, s.n_k_uniform, s.n_k_clustered),
                        basis_w1, n_bands, inverse_rule=s.inverse_rule,
                        threads=s.threads)
    bs_w1.to_csv(args.out / "bands_w1.csv")
    print(f"wrote {args.out / 'bands_bulk.csv'} and {args.out / 'bands_w1.csv'}")
    return 0


def cmd_emission(args) -> int:
    cfg = _load_cfg(args)
    args.out.mkdir(parents=True, exist_ok=True)
    theory = theory_chain(cfg)
    path = args.out / "theory.csv"
    with open(path, "w") as fh:
        fh.write("scaled_freq,gamma_wg_ns,beta\n")
        for q in theory.curve:
            beta = "" if q.beta is None else f"{q.beta:.8g}"
            fh.write(f"{q.scaled_freq:.10g},{q.gamma_wg:.8g},{beta}\n")
    print(f"bulk gap: nu in ({theory.gap.nu_low:.5f}, {theory.gap.nu_high:.5f})")
    print(f"W1 band edge: a/lambda = {theory.nu_edge:.5f} "
          f"(interval {theory.edge_interval[0]:.5f}..{theory.edge_interval[1]:.5f})")
    print(f"wrote {path}")
    return 0


def cmd_synth(args) -> int:
    with open(args.scenario) as fh:
        scenario = json.load(fh)
    paths = synth_campaign(scenario, args.out, seed=args.seed)
    print(f"wrote {len(paths)} histogram pairs to {args.out}")
    return 0


def cmd_fit(args) -> int:
    cfg = _load_cfg(args)
    hist, meta = load_histogram(args.input)
    fitres = select_model(hist, irf_fwhm=cfg.tcspc.irf_fwhm_ps,
                          chi2_threshold=cfg.tcspc.chi2_threshold)
    out = {"file": str(args.input), "id": meta.get("id"), **_fit_to_dict(fitres)}
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_analyze(args) -> int:
    cfg = _load_cfg(args)
    report = analyze_campaign(args.input, cfg, run_theory=not args.no_theory,
                              threads=args.threads)
    files = emit_report(report, args.out)
    n_coupled = sum(r.coupled for r in report.records)
    print(f"{len(report.records)} records ({n_coupled} coupled); "
          f"mean uncoupled rate "
          f"{report.gamma_tot_mean if report.gamma_tot_mean is not None else 'n/a'}"
          f" ns^-1; beta_max {report.beta_max}; "
          f"beta bandwidth {report.beta_bandwidth:.4g}")
    for key, path in files.items():
        print(f"  {key}: {path}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    np.seterr(all="ignore")
    handlers = {
        "bands": cmd_bands,
        "emission": cmd_emission,
        "synth": cmd_synth,
        "fit": cmd_fit,
        "analyze": cmd_analyze,
    }
    try:
        return handlers[args.command](args)
    except (PcwError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
