"""Shared fixtures: small calibrated solves reused across test modules."""

import numpy as np
import pytest

from pcwkit import (CrystalGeometry, ReciprocalBasis, bulk_gap, bulk_k_path,
                    extract_guided_mode, make_bulk_cell, make_w1_supercell,
                    solve_bands, w1_k_path)
from pcwkit.config import CALIBRATED_N_EFF

A_256 = 256e-9
R_FRAC = 0.286


@pytest.fixture(scope="session")
def geom_cal():
    return CrystalGeometry.from_neff(A_256, R_FRAC, CALIBRATED_N_EFF)


@pytest.fixture(scope="session")
def bulk_bs(geom_cal):
    cell = make_bulk_cell(geom_cal)
    basis = ReciprocalBasis.build(cell, 7)
    return solve_bands(cell, bulk_k_path(geom_cal.a, 12), basis, 4)


@pytest.fixture(scope="session")
def gap(bulk_bs):
    return bulk_gap(bulk_bs)


@pytest.fixture(scope="session")
def w1_bs_small(geom_cal):
    """W1 supercell bands at reduced resolution (n_rows 9, cutoff 4)."""
    cell = make_w1_supercell(geom_cal, 9)
    basis = ReciprocalBasis.build(cell, 4)
    kpath = w1_k_path(geom_cal.a, 16, 10)
    return solve_bands(cell, kpath, basis, n_bands=14)


@pytest.fixture(scope="session")
def w1_mode_small(w1_bs_small, gap):
    return extract_guided_mode(w1_bs_small, gap, grid_resolution=20)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
