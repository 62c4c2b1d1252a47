"""Pipeline configuration: defaults, INI-style config files, and the
effective-config snapshot embedded in reports.

Sections: [geometry], [solver], [emission], [tcspc], [classify].  Every
default is overridable from the file; the effective configuration is
rendered back to INI text and stored verbatim in report.json.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace

from .errors import ParameterError
from .pwe import C_LIGHT
from .tcspc import (CHI2_ESCALATION_THRESHOLD, DEFAULT_BIN_WIDTH, DEFAULT_IRF_FWHM,
                    DEFAULT_T0, LRT_BACKGROUND_THRESHOLD, REP_PERIOD_75MHZ)

# Effective membrane index that places the bulk gap edge and the W1 band edge
# at the measured scaled frequencies (0.253 / 0.261 for a = 256 nm); the
# uncalibrated TE0 slab estimate is 2.70.
CALIBRATED_N_EFF = 2.78


@dataclass(frozen=True)
class GeometryConfig:
    a_nm: float = 256.0
    a_delta_nm: float = 2.0            # lattice-parameter uncertainty
    r_over_a: float = 0.286
    n_eff: float = CALIBRATED_N_EFF
    eps_hole: float = 1.0
    t_slab_nm: float = 150.0


@dataclass(frozen=True)
class SolverConfig:
    bulk_cutoff: int = 9
    supercell_cutoff: int = 7
    n_rows: int = 11
    n_k_uniform: int = 64
    n_k_clustered: int = 32
    n_bulk_k_per_segment: int = 20
    n_bands_extra: int = 6
    grid_resolution: int = 24
    localization_threshold: float = 0.5
    strip_halfwidth_rows: float = 1.5
    inverse_rule: bool = True
    threads: int = 1


@dataclass(frozen=True)
class EmissionConfig:
    gamma0_ns: float = 1.1
    vg_floor_over_c: float = 1e-3
    eps: float | None = None           # None: use the geometry's eps_bg
    gamma_tot_ns: float = 0.15         # default mean uncoupled rate for theory beta
    n_points: int = 200


@dataclass(frozen=True)
class TcspcConfig:
    bin_width_ps: float = DEFAULT_BIN_WIDTH
    t0_ps: float = DEFAULT_T0
    rep_period_ps: float = REP_PERIOD_75MHZ
    irf_fwhm_ps: float = DEFAULT_IRF_FWHM
    chi2_threshold: float = CHI2_ESCALATION_THRESHOLD
    lrt_threshold: float = LRT_BACKGROUND_THRESHOLD


@dataclass(frozen=True)
class ClassifyConfig:
    mode: str = "auto"                 # "auto" or "fixed"
    threshold_ns: float = 0.5
    min_cluster_ratio: float = 3.0     # auto falls back below this rate ratio


@dataclass(frozen=True)
class PipelineConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    emission: EmissionConfig = field(default_factory=EmissionConfig)
    tcspc: TcspcConfig = field(default_factory=TcspcConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)

    @property
    def vg_floor(self) -> float:
        return self.emission.vg_floor_over_c * C_LIGHT


def default_config() -> PipelineConfig:
    return PipelineConfig()


_SECTION_TYPES = {
    "geometry": GeometryConfig,
    "solver": SolverConfig,
    "emission": EmissionConfig,
    "tcspc": TcspcConfig,
    "classify": ClassifyConfig,
}


def _parse_value(raw: str, current):
    raw = raw.strip()
    if isinstance(current, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ParameterError(f"expected a boolean, got {raw!r}")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if current is None:
        if raw.lower() in ("none", ""):
            return None
        return float(raw)
    return raw


def load_config(path) -> PipelineConfig:
    """Read an INI config file, overlaying the package defaults."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    return apply_overrides(default_config(), parser)


def apply_overrides(cfg: PipelineConfig, parser: configparser.ConfigParser
                    ) -> PipelineConfig:
    updates = {}
    for section in parser.sections():
        if section not in _SECTION_TYPES:
            raise ParameterError(f"unknown config section [{section}]")
        sub = getattr(cfg, section)
        valid = {f.name for f in fields(sub)}
        kwargs = {}
        for key, raw in parser.items(section):
            if key not in valid:
                raise ParameterError(
                    f"unknown key '{key}' in section [{section}] "
                    f"(valid: {sorted(valid)})")
            kwargs[key] = _parse_value(raw, getattr(sub, key))
        updates[section] = replace(sub, **kwargs)
    return replace(cfg, **updates)


def to_ini_text(cfg: PipelineConfig) -> str:
    """Render the effective configuration as INI text."""
    parser = configparser.ConfigParser()
    for section, sub in (("geometry", cfg.geometry), ("solver", cfg.solver),
                         ("emission", cfg.emission), ("tcspc", cfg.tcspc),
                         ("classify", cfg.classify)):
        parser[section] = {}
        for f in fields(sub):
            val = getattr(sub, f.name)
            parser[section][f.name] = "none" if val is None else repr(val) \
                if isinstance(val, float) else str(val)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def config_dict(cfg: PipelineConfig) -> dict:
    out = {}
    for section in _SECTION_TYPES:
        sub = getattr(cfg, section)
        out[section] = {f.name: getattr(sub, f.name) for f in fields(sub)}
    return out
