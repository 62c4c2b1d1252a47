"""Plane-wave-expansion eigensolver for 2D TE-like modes (out-of-plane H).

The Bloch eigenproblem sum_G' (k+G).(k+G') eta_{G,G'} h_G' = (omega/c)^2 h_G
is assembled with the inverse rule by default: eta is the matrix inverse of
the Toeplitz matrix [eps(G-G')], which converges much faster at high
dielectric contrast than using the Fourier coefficients of 1/eps directly.
The direct rule is kept behind a switch for cross checks.

Frequencies are reported dimensionless, nu = omega a / (2 pi c), with
a = |a1| of the cell.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError, ParameterError
from .geometry import ReciprocalBasis, Supercell, fourier_coefficients

C_LIGHT = 299792458.0


class PlaneWaveOperator:
    """Precomputed eta matrix for one (cell, basis) pair; cheap per-k assembly.

    Instances are immutable after construction and safe to share between
    threads; eigensolves at distinct k-points are independent.
    """

    def __init__(self, cell: Supercell, basis: ReciprocalBasis,
                 inverse_rule: bool = True):
        self.cell = cell
        self.basis = basis
        self.inverse_rule = inverse_rule
        self.a_ref = float(np.linalg.norm(cell.lattice_vectors[0]))
        # eps(G - G') on the index-difference grid, gathered into a full matrix
        m1, m2 = basis.m1, basis.m2
        d1max = int(m1.max() - m1.min())
        d2max = int(m2.max() - m2.min())
        dm1, dm2 = np.meshgrid(np.arange(-d1max, d1max + 1),
                               np.arange(-d2max, d2max + 1), indexing="ij")
        Gdiff = dm1.ravel()[:, None] * basis.g1 + dm2.ravel()[:, None] * basis.g2
        coeffs = fourier_coefficients(cell, Gdiff, of_inverse=not inverse_rule)
        grid = coeffs.reshape(dm1.shape)
        i1 = m1[:, None] - m1[None, :] + d1max
        i2 = m2[:, None] - m2[None, :] + d2max
        T = grid[i1, i2]
        if np.abs(T.imag).max() <= 1e-12 * max(np.abs(T.real).max(), 1.0):
            T = np.ascontiguousarray(T.real)  # inversion-symmetric cell
        if inverse_rule:
            try:
                ch = scipy.linalg.cho_factor(T, check_finite=False)
                eta = scipy.linalg.cho_solve(ch, np.eye(T.shape[0], dtype=T.dtype),
                                             check_finite=False)
            except scipy.linalg.LinAlgError as exc:
                raise NumericalError(
                    f"epsilon Toeplitz matrix is singular or not positive "
                    f"definite for this cell (n_G={len(basis)}): {exc}") from exc
            eta = (eta + eta.conj().T) / 2.0
        else:
            eta = T
        self.eta = eta
        self.is_real = not np.iscomplexobj(eta)
        # scaled k+G, in units of 2 pi / a_ref
        self._g_scaled = basis.g_list * (self.a_ref / (2.0 * np.pi))

    def matrix(self, k) -> np.ndarray:
        """Hermitian operator at Bloch vector k (rad/m); eigenvalues are nu^2."""
        kg = self._g_scaled + np.asarray(k, dtype=float) * (self.a_ref / (2 * np.pi))
        return (kg @ kg.T) * self.eta

    def dmatrix_dk(self, k, axis: int = 0) -> np.ndarray:
        """d(matrix)/d(k_axis), in units of a_ref/(2 pi) per rad/m."""
        kg = self._g_scaled + np.asarray(k, dtype=float) * (self.a_ref / (2 * np.pi))
        col = kg[:, axis]
        return (col[:, None] + col[None, :]) * self.eta

    def solve(self, k, n_bands: int):
        """Lowest n_bands eigenpairs at k; returns (nu, vectors[:, band])."""
        if n_bands > len(self.basis):
            raise ParameterError(
                f"n_bands={n_bands} exceeds basis size {len(self.basis)}")
        theta = self.matrix(k)
        try:
            vals, vecs = scipy.linalg.eigh(
                theta, subset_by_index=[0, n_bands - 1], check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NumericalError(
                f"eigensolver failed at k={np.asarray(k)}: {exc}") from exc
        nu = np.sqrt(np.maximum(vals, 0.0))
        return nu, vecs


def assemble_operator(cell: Supercell, k, basis: ReciprocalBasis,
                      inverse_rule: bool = True) -> np.ndarray:
    """Hermitian PWE matrix at Bloch vector k; eigenvalues are (omega a/2 pi c)^2."""
    return PlaneWaveOperator(cell, basis, inverse_rule=inverse_rule).matrix(k)


@dataclass
class BandStructure:
    """Eigenfrequencies and eigenvectors over a k-path.

    bands[i, b] is nu = omega a/(2 pi c) of band b at k_points[i], bands
    ascending per k.  eigenvectors[i][:, b] are plane-wave coefficients over
    basis.g_list.
    """

    k_points: np.ndarray          # (n_k, 2) rad/m
    bands: np.ndarray             # (n_k, n_bands)
    eigenvectors: list            # n_k arrays (n_G, n_bands)
    cell: Supercell
    basis: ReciprocalBasis
    a_ref: float
    operator: PlaneWaveOperator | None = None

    @property
    def n_k(self) -> int:
        return len(self.k_points)

    @property
    def n_bands(self) -> int:
        return self.bands.shape[1]

    def omega(self, k_index: int, band_index: int) -> float:
        """Angular frequency (rad/s)."""
        return float(self.bands[k_index, band_index]) * 2.0 * np.pi * C_LIGHT / self.a_ref

    def to_csv(self, path):
        """Dump columns (kx a/2pi, ky a/2pi, band_index, nu)."""
        scale = self.a_ref / (2.0 * np.pi)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kx_a_2pi", "ky_a_2pi", "band_index", "nu"])
            for i, k in enumerate(self.k_points):
                for b in range(self.n_bands):
                    w.writerow([f"{k[0] * scale:.10g}", f"{k[1] * scale:.10g}",
                                b, f"{self.bands[i, b]:.12g}"])


def solve_bands(cell: Supercell, k_path, basis: ReciprocalBasis, n_bands: int,
                inverse_rule: bool = True, threads: int = 1,
                operator: PlaneWaveOperator | None = None) -> BandStructure:
    """Solve the lowest ``n_bands`` eigenpairs at every k in ``k_path``.

    Deterministic given inputs; k-points are solved independently (optionally
    in parallel over ``threads``, sharing the read-only operator).
    """
    k_path = np.atleast_2d(np.asarray(k_path, dtype=float))
    if n_bands > len(basis):
        raise ParameterError(
            f"n_bands={n_bands} exceeds basis size {len(basis)}")
    op = operator if operator is not None else PlaneWaveOperator(
        cell, basis, inverse_rule=inverse_rule)

    def one(k):
        try:
            return op.solve(k, n_bands)
        except (NumericalError, ParameterError):
            raise
        except Exception as exc:  # pragma: no cover - defensive
            raise NumericalError(f"solve failed at k={k}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, k_path))
    else:
        results = [one(k) for k in k_path]
    bands = np.array([nu for nu, _ in results])
    vecs = [v for _, v in results]
    return BandStructure(k_points=k_path, bands=bands, eigenvectors=vecs,
                         cell=cell, basis=basis, a_ref=op.a_ref, operator=op)


def empty_lattice_reference(k, g_set, eps: float) -> np.ndarray:
    """Sorted free-photon frequencies omega = c |k+G| / sqrt(eps) (rad/s)."""
    if eps <= 0:
        raise ParameterError(f"permittivity must be positive, got {eps}")
    kg = np.atleast_2d(np.asarray(g_set, dtype=float)) + np.asarray(k, dtype=float)
    return np.sort(C_LIGHT * np.linalg.norm(kg, axis=-1) / np.sqrt(eps))


@dataclass
class ModeField:
    """A Bloch mode sampled on a real-space grid over one cell.

    h_field and e_field hold the periodic parts of the Bloch fields; the
    curl relation E = (c / (i omega eps(r))) (dH/dy, -dH/dx) is evaluated
    with the full derivative d -> d + ik acting on the periodic part.  Both
    fields share one normalization constant chosen so that the cell integral
    of eps |E|^2 equals 1.
    """

    grid_x: np.ndarray            # (n1, n2)
    grid_y: np.ndarray
    h_field: np.ndarray           # (n1, n2) complex
    e_field: np.ndarray           # (n1, n2, 2) complex
    energy_density: np.ndarray    # (n1, n2) eps |E|^2, integrates to 1
    eps_grid: np.ndarray
    dA: float
    cell: Supercell
    nu: float
    k: np.ndarray


def _fft_grid_shape(basis: ReciprocalBasis, grid_resolution: int,
                    cell: Supercell) -> tuple[int, int]:
    lens = np.linalg.norm(cell.lattice_vectors, axis=1)
    n1 = max(int(grid_resolution), int(basis.m1.max() - basis.m1.min()) + 2)
    n2 = max(int(round(grid_resolution * lens[1] / lens[0])),
             int(basis.m2.max() - basis.m2.min()) + 2)
    return n1, n2


def reconstruct_field(bs: BandStructure, k_index: int, band_index: int,
                      grid_resolution: int = 24) -> ModeField:
    """Real-space H and E of one mode on a fractional-coordinate grid.

    H comes from its plane-wave sum (evaluated by zero-padded FFT); E from
    the curl relation divided by the exact piecewise eps(r) on the grid.
    """
    if not (0 <= k_index < bs.n_k and 0 <= band_index < bs.n_bands):
        raise ParameterError(
            f"mode index ({k_index}, {band_index}) out of range "
            f"({bs.n_k} k-points, {bs.n_bands} bands)")
    nu = float(bs.bands[k_index, band_index])
    if nu < 1e-9:
        raise NumericalError(
            "zero-frequency mode: E is undefined by the curl relation")
    cell, basis = bs.cell, bs.basis
    k = bs.k_points[k_index]
    vec = bs.eigenvectors[k_index][:, band_index].astype(complex)
    n1, n2 = _fft_grid_shape(basis, grid_resolution, cell)

    kg = basis.g_list + k
    spec = np.zeros((n1, n2), dtype=complex)
    sx = np.zeros((n1, n2), dtype=complex)
    sy = np.zeros((n1, n2), dtype=complex)
    i1 = basis.m1 % n1
    i2 = basis.m2 % n2
    spec[i1, i2] = vec
    sx[i1, i2] = 1j * kg[:, 0] * vec
    sy[i1, i2] = 1j * kg[:, 1] * vec
    # grid point (j1, j2) sits at r = (j1/n1) a1 + (j2/n2) a2; exp(i G.r)
    # reduces to the 2D inverse DFT phase exp(2 pi i (m1 j1/n1 + m2 j2/n2))
    scale = n1 * n2
    h = np.fft.ifft2(spec) * scale
    dh_dx = np.fft.ifft2(sx) * scale
    dh_dy = np.fft.ifft2(sy) * scale

    f1 = np.arange(n1) / n1
    f2 = np.arange(n2) / n2
    F1, F2 = np.meshgrid(f1, f2, indexing="ij")
    a1, a2 = cell.lattice_vectors
    X = F1 * a1[0] + F2 * a2[0]
    Y = F1 * a1[1] + F2 * a2[1]
    eps = cell.epsilon_at(X, Y)

    omega_over_c = 2.0 * np.pi * nu / bs.a_ref
    pref = 1.0 / (1j * omega_over_c * eps)
    ex = pref * dh_dy
    ey = -pref * dh_dx
    u = eps * (np.abs(ex) ** 2 + np.abs(ey) ** 2)
    dA = cell.area / (n1 * n2)
    norm = u.sum() * dA
    if norm <= 0:
        raise NumericalError("zero field; cannot normalize")
    s = 1.0 / np.sqrt(norm)
    e = np.stack([ex, ey], axis=-1) * s
    return ModeField(grid_x=X, grid_y=Y, h_field=h * s, e_field=e,
                     energy_density=u / norm, eps_grid=eps, dA=dA, cell=cell,
                     nu=nu, k=np.array(k, dtype=float))
