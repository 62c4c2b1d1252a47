"""Spontaneous-emission rate into the waveguide and beta-factors.

The rate of an optimally placed dipole emitting into the guided mode is

    Gamma = Gamma0 * 3 pi c^3 a / (V_eff omega^2 eps^(3/2) v_g(omega))

with Gamma0 the homogeneous-medium decay rate.  Rates cross the API in
ns^-1; SI is used internally.  A configurable group-velocity floor keeps the
band-edge divergence finite, standing in for the disorder-induced saturation
of the slow-down factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .dispersion import WaveguideMode, dispersion_interpolators
from .geometry import DEFAULT_N_EFF
from .pwe import C_LIGHT


@dataclass(frozen=True)
class EmissionParams:
    """Inputs to the rate formula.

    gamma0 in ns^-1; eps is the permittivity entering the formula (defaults
    to the background/effective permittivity); vg_floor in m/s.
    """

    gamma0: float = 1.1
    eps: float = DEFAULT_N_EFF**2
    a: float = 256e-9
    vg_floor: float = C_LIGHT / 1000.0

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ParameterError(f"gamma0 must be positive, got {self.gamma0}")
        if not self.eps >= 1.0:
            raise ParameterError(f"eps must be >= 1, got {self.eps}")
        if not self.a > 0:
            raise ParameterError(f"lattice parameter must be positive, got {self.a}")
        if not self.vg_floor > 0:
            raise ParameterError(f"vg_floor must be positive, got {self.vg_floor}")


@dataclass(frozen=True)
class EmissionPoint:
    """One point of a rate spectrum: (a/lambda, Gamma_wg in ns^-1, beta)."""

    scaled_freq: float
    gamma_wg: float
    beta: float | None = None

    def __post_init__(self):
        if self.gamma_wg < 0:
            raise ParameterError(f"gamma_wg must be >= 0, got {self.gamma_wg}")
        if self.beta is not None and not 0.0 <= self.beta <= 1.0:
            raise ParameterError(f"beta must lie in [0, 1], got {self.beta}")


def decay_rate(omega: float, v_g: float, v_eff: float, p: EmissionParams) -> float:
    """Emission rate into the waveguide (ns^-1) at emitter frequency omega.

    v_g is clamped from below at p.vg_floor before evaluating the formula.
    """
    if omega <= 0 or v_g <= 0 or v_eff <= 0:
        raise ParameterError(
            f"omega, v_g and v_eff must be positive "
            f"(got {omega}, {v_g}, {v_eff})")
    vg = max(v_g, p.vg_floor)
    gamma0_si = p.gamma0 * 1e9
    gamma_si = gamma0_si * 3.0 * np.pi * C_LIGHT**3 * p.a / (
        v_eff * omega**2 * p.eps**1.5 * vg)
    return gamma_si * 1e-9


def scaled_frequency(a: float, lam: float) -> float:
    """Dimensionless frequency a/lambda."""
    if a <= 0 or lam <= 0:
        raise ParameterError(f"a and lambda must be positive (got {a}, {lam})")
    return a / lam


def beta_factor(gamma_wg: float, gamma_tot: float) -> float:
    """beta = Gamma_wg / (Gamma_wg + Gamma_tot) with Gamma_tot = Gamma_rad + Gamma_nr."""
    if gamma_wg < 0 or gamma_tot < 0:
        raise ParameterError("rates must be non-negative")
    if gamma_wg == 0 and gamma_tot == 0:
        raise ParameterError("beta undefined when both rates vanish")
    return gamma_wg / (gamma_wg + gamma_tot)


def beta_from_measurement(gamma_fast: float, gamma_tot_mean: float) -> float:
    """beta from the measured fast rate and the mean uncoupled rate.

    beta = 1 - Gamma_tot/Gamma_fast, i.e. the fast rate is Gamma_wg +
    Gamma_tot and the waveguide part is the excess over the uncoupled mean.
    """
    if gamma_tot_mean < 0:
        raise ParameterError("gamma_tot_mean must be >= 0")
    if gamma_fast <= gamma_tot_mean:
        from .errors import NotCoupledError
        raise NotCoupledError(
            f"fast rate {gamma_fast} ns^-1 does not exceed the uncoupled mean "
            f"{gamma_tot_mean} ns^-1; emitter is not coupled")
    return 1.0 - gamma_tot_mean / gamma_fast


def decay_rate_spectrum(mode: WaveguideMode, p: EmissionParams,
                        n_points: int = 200,
                        gamma_tot: float | None = None) -> list[EmissionPoint]:
    """Gamma(a/lambda) sampled over the guided branch's monotone tail.

    Frequencies are sampled uniformly over the branch range and mapped back
    to k through the dispersion; beta is attached when ``gamma_tot`` (ns^-1)
    is supplied.
    """
    if len(mode.omega) < 2:
        raise ParameterError("waveguide mode needs at least two samples")
    if n_points < 2:
        raise ParameterError(f"n_points must be >= 2, got {n_points}")
    from .dispersion import _monotone_tail
    _, vg_interp, veff_interp = dispersion_interpolators(mode)
    _, tail_oms = _monotone_tail(mode)
    om_lo, om_hi = float(tail_oms.min()), float(tail_oms.max())
    omegas = np.linspace(om_lo, om_hi, n_points)
    pts = []
    from .dispersion import invert_dispersion
    for om in omegas:
        k = invert_dispersion(mode, float(om))
        vg = float(vg_interp(k))
        veff = float(veff_interp(k))
        g = decay_rate(float(om), max(vg, 1e-12), veff, p)
        beta = beta_factor(g, gamma_tot) if gamma_tot is not None else None
        pts.append(EmissionPoint(
            scaled_freq=float(om) * p.a / (2.0 * np.pi * C_LIGHT),
            gamma_wg=g, beta=beta))
    pts.sort(key=lambda q: q.scaled_freq)
    return pts


def beta_bandwidth(points: list[EmissionPoint], threshold: float = 0.5) -> float:
    """Relative bandwidth of the beta > threshold region.

    (max - min scaled frequency with beta above threshold) divided by their
    midpoint; zero when fewer than two points qualify.
    """
    freqs = [q.scaled_freq for q in points
             if q.beta is not None and q.beta > threshold]
    if len(freqs) < 2:
        return 0.0
    lo, hi = min(freqs), max(freqs)
    if hi == lo:
        return 0.0
    return (hi - lo) / (0.5 * (hi + lo))
