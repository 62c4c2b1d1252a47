"""Guided-mode extraction from W1 supercell bands: dispersion omega(k), group
velocity, effective mode volume, and the slow-light band edge."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import (NoGapError, NoGuidedModeError, NumericalError,
                     OutOfBandError, ParameterError)
from .geometry import CrystalGeometry, Supercell
from .pwe import C_LIGHT, BandStructure, ModeField, PlaneWaveOperator, reconstruct_field

LOCALIZATION_THRESHOLD = 0.5
STRIP_HALFWIDTH_ROWS = 1.5
MIN_BRANCH_OVERLAP = 0.3


@dataclass(frozen=True)
class GapWindow:
    """Bulk TE gap edges in scaled frequency nu = omega a/(2 pi c)."""

    nu_low: float
    nu_high: float

    def __post_init__(self):
        if not self.nu_low < self.nu_high:
            raise ParameterError(
                f"gap window requires nu_low < nu_high, got "
                f"({self.nu_low}, {self.nu_high})")

    def contains(self, nu: float) -> bool:
        return self.nu_low < nu < self.nu_high


@dataclass
class WaveguideMode:
    """The extracted guided branch, sampled along kx in [0, pi/a].

    omega(k) is single-valued on the branch; v_g holds |d omega/d k| (the
    branch is oriented so group velocities are non-negative) and vanishes at
    the zone boundary.  v_eff is the per-period peak-normalized mode volume.
    """

    k_samples: np.ndarray         # (n,) rad/m, strictly increasing
    omega: np.ndarray             # (n,) rad/s
    v_g: np.ndarray               # (n,) m/s, >= 0
    v_eff: np.ndarray             # (n,) m^3
    omega_edge: float             # rad/s at k = pi/a
    localization: np.ndarray      # (n,) energy fraction near the defect
    a_ref: float
    band_indices: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    slope_sign: int = 1           # sign of d omega/d k on the branch

    @property
    def nu(self) -> np.ndarray:
        """Scaled frequencies omega a/(2 pi c)."""
        return self.omega * self.a_ref / (2.0 * np.pi * C_LIGHT)

    @property
    def nu_edge(self) -> float:
        return float(self.omega_edge * self.a_ref / (2.0 * np.pi * C_LIGHT))

    def to_csv(self, path):
        """Dump (k a/pi, nu, v_g/c, v_eff in a^2 h t units is left to callers)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k_a_pi", "nu", "vg_over_c", "v_eff_m3", "localization"])
            for k, om, vg, ve, loc in zip(self.k_samples, self.omega, self.v_g,
                                          self.v_eff, self.localization):
                w.writerow([f"{k * self.a_ref / np.pi:.10g}",
                            f"{om * self.a_ref / (2 * np.pi * C_LIGHT):.12g}",
                            f"{vg / C_LIGHT:.10g}", f"{ve:.10g}", f"{loc:.6g}"])


def bulk_gap(bs: BandStructure) -> GapWindow:
    """Gap between the maximum of band 1 and the minimum of band 2 on the path."""
    if bs.n_bands < 2:
        raise ParameterError("need at least two bands to locate a gap")
    top = float(bs.bands[:, 0].max())
    bottom = float(bs.bands[:, 1].min())
    if bottom <= top:
        raise NoGapError(
            f"no gap between bands 1 and 2: band 1 max {top:.5f} >= "
            f"band 2 min {bottom:.5f}")
    return GapWindow(nu_low=top, nu_high=bottom)


def localization_fraction(fld: ModeField,
                          strip_halfwidth_rows: float = STRIP_HALFWIDTH_ROWS) -> float:
    """Energy fraction within a transverse strip around the defect axis (y=0).

    The strip half-width is ``strip_halfwidth_rows`` times the row spacing
    a sqrt(3)/2; y is wrapped into the centered cell before the test.
    """
    a = np.linalg.norm(fld.cell.lattice_vectors[0])
    h = a * np.sqrt(3.0) / 2.0
    height = abs(fld.cell.lattice_vectors[1][1])
    y = (fld.grid_y + height / 2.0) % height - height / 2.0
    mask = np.abs(y) <= strip_halfwidth_rows * h
    return float(fld.energy_density[mask].sum() * fld.dA)


def group_velocity(bs: BandStructure, k_index: int, band_index: int) -> float:
    """Hellmann-Feynman group velocity d omega/d kx (m/s, signed).

    v_g = (c^2 / 2 omega) <h| dTheta/dk |h> for the normalized eigenvector;
    cross-check against finite differences of omega(k) where needed.
    """
    nu = float(bs.bands[k_index, band_index])
    if nu < 1e-12:
        raise NumericalError("group velocity undefined for a zero-frequency mode")
    op = bs.operator
    if op is None:
        op = PlaneWaveOperator(bs.cell, bs.basis)
    k = bs.k_points[k_index]
    vec = bs.eigenvectors[k_index][:, band_index]
    # scaled operator eigenvalue is nu^2 and the scaled k is k a/(2 pi):
    # d nu/d k_scaled = <h| dTheta/dk |h> / (2 nu), and v_g = c d nu/d k_scaled
    kg_x = (bs.basis.g_list[:, 0] + k[0]) * (op.a_ref / (2.0 * np.pi))
    p = kg_x * vec
    dlam = 2.0 * np.real(np.conj(p) @ (op.eta @ vec))
    return float(C_LIGHT * dlam / (2.0 * nu))


def effective_mode_volume(fld: ModeField, geom: CrystalGeometry) -> float:
    """Per-period effective mode volume (m^3).

    V_eff = [integral of eps|E|^2 over the cell / max(eps|E|^2)] * t_slab.
    The quotient is invariant under any global rescaling of the field.
    """
    u = fld.energy_density
    peak = float(u.max())
    if peak <= 0.0:
        raise ParameterError("zero field: effective mode volume undefined")
    return float(u.sum() * fld.dA / peak * geom.t_slab)


def _mode_volume_from_cell(fld: ModeField) -> float:
    u = fld.energy_density
    peak = float(u.max())
    if peak <= 0.0:
        raise ParameterError("zero field: effective mode volume undefined")
    return float(u.sum() * fld.dA / peak * fld.cell.t_slab)


def extract_guided_mode(bs: BandStructure, gap: GapWindow,
                        localization_threshold: float = LOCALIZATION_THRESHOLD,
                        strip_halfwidth_rows: float = STRIP_HALFWIDTH_ROWS,
                        grid_resolution: int = 24) -> WaveguideMode:
    """Trace the fundamental W1 guided branch through the gap.

    At each k the candidate bands are those inside the gap window whose mode
    field passes the localization threshold; continuity across k is enforced
    by eigenvector overlap (frequency-only sorting misassigns branches at
    anti-crossings).  The branch is seeded at the zone boundary with the
    lowest localized in-gap band and traced toward smaller k.
    """
    kx = bs.k_points[:, 0]
    if np.any(np.abs(bs.k_points[:, 1]) > 1e-9 * np.abs(kx).max()):
        raise ParameterError("W1 band structure must be solved along ky = 0")
    k_edge = np.pi / bs.a_ref
    if abs(kx[-1] - k_edge) > 1e-6 * k_edge:
        raise ParameterError(
            "k-path must end at the zone boundary kx = pi/a for band-edge "
            f"extraction (last kx = {kx[-1]:.6g}, pi/a = {k_edge:.6g})")

    def localized_candidates(i):
        out = []
        for b in range(bs.n_bands):
            if not gap.contains(float(bs.bands[i, b])):
                continue
            fld = reconstruct_field(bs, i, b, grid_resolution=grid_resolution)
            loc = localization_fraction(fld, strip_halfwidth_rows)
            if loc >= localization_threshold:
                out.append((b, loc, fld))
        return out

    seed = localized_candidates(bs.n_k - 1)
    if not seed:
        raise NoGuidedModeError(
            "no localized band inside the gap at the zone boundary")
    seed.sort(key=lambda t: bs.bands[bs.n_k - 1, t[0]])
    band0, loc0, fld0 = seed[0]

    picked = [(bs.n_k - 1, band0, loc0, fld0)]
    prev_vec = bs.eigenvectors[bs.n_k - 1][:, band0]
    for i in range(bs.n_k - 2, -1, -1):
        cands = localized_candidates(i)
        if not cands:
            break
        overlaps = [abs(np.vdot(prev_vec, bs.eigenvectors[i][:, b]))
                    for b, _, _ in cands]
        j = int(np.argmax(overlaps))
        if overlaps[j] < MIN_BRANCH_OVERLAP:
            break
        b, loc, fld = cands[j]
        picked.append((i, b, loc, fld))
        prev_vec = bs.eigenvectors[i][:, b]
    picked.reverse()

    idx = [p[0] for p in picked]
    bands_sel = [p[1] for p in picked]
    locs = np.array([p[2] for p in picked])
    omegas = np.array([bs.omega(i, b) for i, b in zip(idx, bands_sel)])
    vgs = np.abs([group_velocity(bs, i, b) for i, b in zip(idx, bands_sel)])
    veffs = np.array([_mode_volume_from_cell(p[3]) for p in picked])
    ks = kx[idx]
    slope = int(np.sign(omegas[-1] - omegas[0])) or 1
    return WaveguideMode(k_samples=ks, omega=omegas, v_g=np.asarray(vgs),
                         v_eff=veffs, omega_edge=float(omegas[-1]),
                         localization=locs, a_ref=bs.a_ref,
                         band_indices=np.array(bands_sel, dtype=int),
                         slope_sign=slope)


def band_edge(mode: WaveguideMode) -> float:
    """Zone-boundary frequency of the branch (rad/s): omega at k = pi/a."""
    return float(mode.omega_edge)


def _monotone_tail(mode: WaveguideMode) -> tuple[np.ndarray, np.ndarray]:
    """Longest strictly monotone omega(k) segment ending at the zone boundary."""
    om = mode.omega
    k = mode.k_samples
    n = len(om)
    if n < 2:
        raise ParameterError("branch needs at least two samples")
    sign = np.sign(om[-1] - om[-2])
    if sign == 0:
        sign = -1.0
    start = n - 1
    while start > 0 and np.sign(om[start] - om[start - 1]) == sign:
        start -= 1
    return k[start:], om[start:]


def invert_dispersion(mode: WaveguideMode, omega: float) -> float:
    """k (rad/m) with omega(k) = omega on the branch's monotone tail.

    Solves the monotone piecewise-cubic interpolant of the sampled omega(k)
    by bracketed root finding, so the round trip |omega(k(w)) - w| stays at
    solver tolerance.
    """
    ks, oms = _monotone_tail(mode)
    lo, hi = min(oms[0], oms[-1]), max(oms[0], oms[-1])
    if not lo <= omega <= hi:
        raise OutOfBandError(
            f"omega={omega:.6g} rad/s outside the branch range "
            f"[{lo:.6g}, {hi:.6g}] on its monotone segment")
    exact = np.nonzero(np.abs(oms - omega) <= 1e-15 * hi)[0]
    if exact.size:
        return float(ks[exact[0]])
    interp = PchipInterpolator(ks, oms)

    def f(k):
        return float(interp(k)) - omega

    return float(brentq(f, ks[0], ks[-1], xtol=1e-12 * ks[-1], rtol=1e-15))


def dispersion_interpolators(mode: WaveguideMode):
    """Pchip interpolators (omega, v_g, v_eff) as functions of k on the tail."""
    ks, oms = _monotone_tail(mode)
    mask = np.isin(mode.k_samples, ks)
    return (PchipInterpolator(ks, oms),
            PchipInterpolator(ks, mode.v_g[mask]),
            PchipInterpolator(ks, mode.v_eff[mask]))


def w1_k_path(a: float, n_uniform: int = 64, n_clustered: int = 32,
              k_min: float = 0.0) -> np.ndarray:
    """kx samples in [k_min, pi/a]: uniform base plus a geometric cluster
    toward the zone boundary to resolve the slow-light region."""
    k_edge = np.pi / a
    base = np.linspace(k_min, k_edge, n_uniform)
    if n_clustered > 0:
        du = (k_edge - k_min) / max(n_uniform - 1, 1)
        offsets = du * 0.85 ** np.arange(1, n_clustered + 1)
        extra = k_edge - offsets
        ks = np.unique(np.concatenate([base, extra]))
    else:
        ks = base
    return np.column_stack([ks, np.zeros_like(ks)])


def bulk_k_path(a: float, n_per_segment: int = 20) -> np.ndarray:
    """Gamma - M - K - Gamma path of the triangular lattice."""
    gamma = np.zeros(2)
    m_pt = np.array([np.pi / a, np.pi / (np.sqrt(3.0) * a)])
    k_pt = np.array([4.0 * np.pi / (3.0 * a), 0.0])
    pts = []
    for p, q in ((gamma, m_pt), (m_pt, k_pt), (k_pt, gamma)):
        for t in np.linspace(0.0, 1.0, n_per_segment, endpoint=False):
            pts.append(p + (q - p) * t)
    pts.append(gamma)
    return np.array(pts)
