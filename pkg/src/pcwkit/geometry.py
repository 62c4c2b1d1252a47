"""Photonic-crystal geometry: triangular lattice cells, W1 supercells, and
analytic Fourier coefficients of the dielectric function.

All lengths are in meters.  The triangular lattice has primitive vectors
a1 = a (1, 0) and a2 = a (1/2, sqrt(3)/2).  W1 supercells span one period
along x and ``n_rows`` hole rows along y with the center row removed; the
second lattice vector carries an a/2 shear so that an odd-row supercell
without the defect tiles the infinite triangular lattice exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j1

from .errors import ParameterError

DEFAULT_N_EFF = 2.70      # TE0 effective index of the 150 nm membrane (calibration knob)
DEFAULT_SLAB_THICKNESS = 150e-9
MAX_FILL_FACTOR = 2.0 * np.pi / np.sqrt(3.0) * 0.25  # holes touch at r = a/2


@dataclass(frozen=True)
class CrystalGeometry:
    """Bulk crystal parameters.

    Parameters
    ----------
    a : float
        Lattice parameter (m).
    r : float
        Hole radius (m), 0 <= r < a/2.
    eps_bg : float
        Background permittivity; defaults to the squared effective index.
    eps_hole : float
        Hole permittivity.
    t_slab : float
        Membrane thickness (m), used when promoting 2D mode areas to volumes.
    """

    a: float
    r: float
    eps_bg: float = DEFAULT_N_EFF**2
    eps_hole: float = 1.0
    t_slab: float = DEFAULT_SLAB_THICKNESS

    def __post_init__(self):
        if not self.a > 0:
            raise ParameterError(f"lattice parameter must be positive, got {self.a}")
        if not 0 <= self.r < 0.5 * self.a:
            raise ParameterError(
                f"hole radius must satisfy 0 <= r < a/2, got r={self.r}, a={self.a}")
        if not self.eps_hole >= 1.0:
            raise ParameterError(f"hole permittivity must be >= 1, got {self.eps_hole}")
        if not self.eps_bg > self.eps_hole:
            raise ParameterError(
                f"background permittivity ({self.eps_bg}) must exceed hole "
                f"permittivity ({self.eps_hole})")
        if not self.t_slab > 0:
            raise ParameterError(f"slab thickness must be positive, got {self.t_slab}")
        if not self.fill_factor < MAX_FILL_FACTOR:
            raise ParameterError(
                f"hole area fraction {self.fill_factor:.4f} out of range "
                f"(holes touch at {MAX_FILL_FACTOR:.4f})")

    @property
    def fill_factor(self) -> float:
        """Hole area fraction f = (2 pi / sqrt(3)) (r/a)^2 of the bulk cell."""
        return 2.0 * np.pi / np.sqrt(3.0) * (self.r / self.a) ** 2

    @classmethod
    def from_neff(cls, a: float, r_over_a: float, n_eff: float = DEFAULT_N_EFF,
                  eps_hole: float = 1.0,
                  t_slab: float = DEFAULT_SLAB_THICKNESS) -> "CrystalGeometry":
        """Build from the fractional radius and membrane effective index."""
        return cls(a=a, r=r_over_a * a, eps_bg=n_eff**2, eps_hole=eps_hole,
                   t_slab=t_slab)


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Supercell:
    """A periodic 2D cell: lattice vectors plus circular hole sites.

    ``hole_centers``, ``hole_radii`` and ``is_defect`` are parallel lists over
    all lattice sites in the cell; defect sites have radius 0 and carry no
    hole.  Immutable and safe to share across threads.
    """

    lattice_vectors: np.ndarray        # (2, 2), rows a1, a2
    hole_centers: np.ndarray           # (n_sites, 2)
    hole_radii: np.ndarray             # (n_sites,)
    eps_bg: float
    eps_hole: float
    is_defect: np.ndarray              # (n_sites,) bool
    t_slab: float = DEFAULT_SLAB_THICKNESS

    def __post_init__(self):
        object.__setattr__(self, "lattice_vectors",
                           _readonly(np.asarray(self.lattice_vectors, dtype=float)))
        object.__setattr__(self, "hole_centers",
                           _readonly(np.asarray(self.hole_centers, dtype=float).reshape(-1, 2)))
        object.__setattr__(self, "hole_radii",
                           _readonly(np.asarray(self.hole_radii, dtype=float).ravel()))
        object.__setattr__(self, "is_defect",
                           _readonly(np.asarray(self.is_defect, dtype=bool).ravel()))
        if len(self.hole_radii) != len(self.hole_centers) or \
                len(self.is_defect) != len(self.hole_centers):
            raise ParameterError("site lists must be parallel")
        if np.any(self.hole_radii < 0):
            raise ParameterError("hole radii must be non-negative")
        if np.any(self.hole_radii[self.is_defect] != 0.0):
            raise ParameterError("defect sites carry no hole")
        self._check_overlaps()

    def _check_overlaps(self):
        """Holes must not overlap each other, including periodic images."""
        active = ~self.is_defect & (self.hole_radii > 0)
        c = self.hole_centers[active]
        r = self.hole_radii[active]
        n = len(c)
        if n == 0:
            return
        shifts = np.array([[i, j] for i in (-1, 0, 1) for j in (-1, 0, 1)],
                          dtype=float) @ self.lattice_vectors
        for s in shifts:
            d = np.linalg.norm(c[:, None, :] + s - c[None, :, :], axis=-1)
            rsum = r[:, None] + r[None, :]
            if np.allclose(s, 0.0):
                np.fill_diagonal(d, np.inf)
            if np.any(d < rsum - 1e-15):
                raise ParameterError("holes overlap (possibly across the cell boundary)")

    @property
    def area(self) -> float:
        """Cell area |a1 x a2|."""
        a1, a2 = self.lattice_vectors
        return abs(float(a1[0] * a2[1] - a1[1] * a2[0]))

    @property
    def n_holes(self) -> int:
        """Number of actual (non-defect, finite-radius) holes."""
        return int(np.sum(~self.is_defect & (self.hole_radii > 0)))

    def epsilon_at(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Piecewise permittivity sampled at points (x, y), periodic images included."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        eps = np.full(np.broadcast(x, y).shape, self.eps_bg)
        a1, a2 = self.lattice_vectors
        for (cx, cy), r, dfct in zip(self.hole_centers, self.hole_radii, self.is_defect):
            if dfct or r <= 0:
                continue
            for s1 in (-1, 0, 1):
                for s2 in (-1, 0, 1):
                    ox = cx + s1 * a1[0] + s2 * a2[0]
                    oy = cy + s1 * a1[1] + s2 * a2[1]
                    eps[(x - ox) ** 2 + (y - oy) ** 2 <= r * r] = self.eps_hole
        return eps


def make_bulk_cell(geom: CrystalGeometry) -> Supercell:
    """Primitive triangular cell with a single hole at the origin."""
    a = geom.a
    vecs = np.array([[a, 0.0], [a / 2.0, a * np.sqrt(3.0) / 2.0]])
    return Supercell(lattice_vectors=vecs,
                     hole_centers=np.array([[0.0, 0.0]]),
                     hole_radii=np.array([geom.r]),
                     eps_bg=geom.eps_bg, eps_hole=geom.eps_hole,
                     is_defect=np.array([False]),
                     t_slab=geom.t_slab)


def make_supercell(geom: CrystalGeometry, n_rows: int,
                   defect_rows: tuple[int, ...] = ()) -> Supercell:
    """Supercell of ``n_rows`` hole rows (one period along x), rows listed in
    ``defect_rows`` (indexed from the center row = 0) left empty.

    Requires odd ``n_rows``; the second lattice vector is (a/2, n_rows h) so
    the defect-free supercell tiles the triangular lattice exactly.
    """
    if n_rows % 2 == 0 or n_rows < 7:
        raise ParameterError(f"n_rows must be odd and >= 7, got {n_rows}")
    a = geom.a
    h = a * np.sqrt(3.0) / 2.0
    vecs = np.array([[a, 0.0], [a / 2.0, n_rows * h]])
    jmax = (n_rows - 1) // 2
    centers, radii, defect = [], [], []
    for j in range(-jmax, jmax + 1):
        x = a / 2.0 if (j % 2) else 0.0
        is_dfct = j in defect_rows
        centers.append([x, j * h])
        radii.append(0.0 if is_dfct else geom.r)
        defect.append(is_dfct)
    return Supercell(lattice_vectors=vecs,
                     hole_centers=np.array(centers),
                     hole_radii=np.array(radii),
                     eps_bg=geom.eps_bg, eps_hole=geom.eps_hole,
                     is_defect=np.array(defect),
                     t_slab=geom.t_slab)


def make_w1_supercell(geom: CrystalGeometry, n_rows: int) -> Supercell:
    """W1 waveguide supercell: the center row of holes is removed."""
    return make_supercell(geom, n_rows, defect_rows=(0,))


@dataclass(frozen=True)
class ReciprocalBasis:
    """Plane-wave basis: G = m1 g1 + m2 g2 over an index rectangle.

    ``cutoff`` is the bulk-equivalent resolution: the index range along each
    direction is scaled by the cell aspect ratio (max index along direction i
    is round(cutoff |a_i| / min_j |a_j|)), so elongated supercells resolve the
    holes as well as the bulk cell does.
    """

    g1: np.ndarray
    g2: np.ndarray
    cutoff: int
    m1: np.ndarray                      # (n_G,) int
    m2: np.ndarray                      # (n_G,) int
    g_list: np.ndarray = field(init=False)  # (n_G, 2)

    def __post_init__(self):
        object.__setattr__(self, "g1", _readonly(np.asarray(self.g1, dtype=float)))
        object.__setattr__(self, "g2", _readonly(np.asarray(self.g2, dtype=float)))
        object.__setattr__(self, "m1", _readonly(np.asarray(self.m1, dtype=np.int64)))
        object.__setattr__(self, "m2", _readonly(np.asarray(self.m2, dtype=np.int64)))
        g_list = self.m1[:, None] * self.g1 + self.m2[:, None] * self.g2
        object.__setattr__(self, "g_list", _readonly(g_list))

    def __len__(self) -> int:
        return len(self.m1)

    @classmethod
    def build(cls, cell: Supercell, cutoff: int) -> "ReciprocalBasis":
        if cutoff < 1:
            raise ParameterError(f"cutoff must be >= 1, got {cutoff}")
        g1, g2 = reciprocal_vectors(cell.lattice_vectors)
        lens = np.linalg.norm(cell.lattice_vectors, axis=1)
        ref = lens.min()
        n1 = max(cutoff, int(round(cutoff * lens[0] / ref)))
        n2 = max(cutoff, int(round(cutoff * lens[1] / ref)))
        m1, m2 = np.meshgrid(np.arange(-n1, n1 + 1), np.arange(-n2, n2 + 1),
                             indexing="ij")
        return cls(g1=g1, g2=g2, cutoff=cutoff, m1=m1.ravel(), m2=m2.ravel())

    @classmethod
    def from_indices(cls, cell: Supercell, m1, m2, cutoff: int = 0) -> "ReciprocalBasis":
        """Explicit index set (used by folded-spectrum cross checks)."""
        g1, g2 = reciprocal_vectors(cell.lattice_vectors)
        return cls(g1=g1, g2=g2, cutoff=cutoff,
                   m1=np.asarray(m1), m2=np.asarray(m2))


def reciprocal_vectors(lattice_vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """g1, g2 with g_i . a_j = 2 pi delta_ij."""
    B = 2.0 * np.pi * np.linalg.inv(np.asarray(lattice_vectors, dtype=float)).T
    return B[0], B[1]


def _disk_form_factor(g_norm: np.ndarray, radius: float, area: float) -> np.ndarray:
    """Fourier transform of a unit disk divided by the cell area.

    2 pi r^2 / A * J1(|G| r)/(|G| r), with the |G| -> 0 limit pi r^2 / A.
    """
    x = np.asarray(g_norm, dtype=float) * radius
    out = np.empty(x.shape, dtype=float)
    small = x < 1e-9
    out[small] = np.pi * radius**2 / area
    xs = x[~small]
    out[~small] = 2.0 * np.pi * radius**2 / area * j1(xs) / xs
    return out


def fourier_coefficients(cell: Supercell, G: np.ndarray,
                         of_inverse: bool = False) -> np.ndarray:
    """Analytic Fourier coefficients of eps(r) (or 1/eps) at G vectors (n, 2).

    Each coefficient is the background value at G = 0 plus one disk term per
    hole with phase exp(-i G . R_hole).
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    base = 1.0 / cell.eps_bg if of_inverse else cell.eps_bg
    delta = ((1.0 / cell.eps_hole - 1.0 / cell.eps_bg) if of_inverse
             else (cell.eps_hole - cell.eps_bg))
    g_norm = np.linalg.norm(G, axis=-1)
    out = np.zeros(len(G), dtype=complex)
    area = cell.area
    for center, radius, dfct in zip(cell.hole_centers, cell.hole_radii,
                                    cell.is_defect):
        if dfct or radius <= 0:
            continue
        out += delta * _disk_form_factor(g_norm, radius, area) * \
            np.exp(-1j * (G @ center))
    out[g_norm < 1e-9 * 2 * np.pi / np.sqrt(area)] += base
    return out


def fourier_coefficient(cell: Supercell, G, of_inverse: bool = False) -> complex:
    """Single Fourier coefficient of eps (or 1/eps) at a reciprocal-lattice G."""
    G = np.asarray(G, dtype=float).reshape(2)
    m = cell.lattice_vectors @ G / (2.0 * np.pi)
    if np.max(np.abs(m - np.round(m))) > 1e-6:
        raise ParameterError(
            f"G={G} is not on the reciprocal lattice of the cell (indices {m})")
    return complex(fourier_coefficients(cell, G[None, :], of_inverse)[0])
