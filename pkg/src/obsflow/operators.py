"""Single-particle operators on the site basis.

All operators are dense complex ``(N, N)`` numpy arrays; N is the number of
sites (one electron, so the Hilbert space is the site space).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .lattice import DeviceSpec, Region

HERMITICITY_TOL = 1e-12


def is_hermitian(A: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return bool(np.max(np.abs(A - A.conj().T)) <= tol)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending, hartree) and orthonormal eigenvector columns."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.energies.size

    def to_eigenbasis(self, A: np.ndarray) -> np.ndarray:
        V = self.vectors
        return V.conj().T @ A @ V

    def from_eigenbasis(self, A: np.ndarray) -> np.ndarray:
        V = self.vectors
        return V @ A @ V.conj().T


class EigendecompositionError(RuntimeError):
    pass


def assemble_hamiltonian(device: DeviceSpec) -> np.ndarray:
    """Tight-binding Hamiltonian: on-site energies on the diagonal, minus the
    hopping on every bond."""
    n = device.n_sites
    H = np.zeros((n, n), dtype=complex)
    for s in device.sites:
        H[s.id, s.id] = s.onsite
    for (i, j, t) in device.bonds:
        H[i, j] = -t
        H[j, i] = -t
    return H


def eigendecompose(H: np.ndarray) -> SpectralDecomposition:
    if not is_hermitian(H, 1e-10 * max(1.0, float(np.max(np.abs(H))))):
        raise EigendecompositionError("matrix is not Hermitian")
    try:
        energies, vectors = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(
            f"eigendecomposition failed: {exc}; ||H||_max={np.max(np.abs(H)):.3e}"
        ) from exc
    return SpectralDecomposition(energies, vectors)


def dipole_coupling_operator(device: DeviceSpec, region: Region, axis: str) -> np.ndarray:
    """Masked dipole operator: diagonal ``-(r_i . u)`` on the region's sites.

    Positions are taken relative to the device centroid, which keeps both
    mirror symmetries of the flat device intact.
    """
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    ax = 0 if axis == "x" else 1
    cen = device.centroid()
    n = device.n_sites
    S = np.zeros((n, n), dtype=complex)
    for i in device.region_sites(region):
        S[i, i] = -(device.sites[i].position[ax] - cen[ax])
    return S


def site_projector(device: DeviceSpec, k: int) -> np.ndarray:
    if not (0 <= k < device.n_sites):
        raise ValueError(f"invalid site id {k}")
    P = np.zeros((device.n_sites, device.n_sites), dtype=complex)
    P[k, k] = 1.0
    return P


def region_number_operator(device: DeviceSpec, sites: Iterable[int]) -> np.ndarray:
    N = np.zeros((device.n_sites, device.n_sites), dtype=complex)
    for i in sites:
        N[i, i] = 1.0
    return N


def region_energy_operator(device: DeviceSpec, H: np.ndarray, sites: Iterable[int]) -> np.ndarray:
    """Sum of local energy densities over a region.

    Each bond's hopping term is split half-and-half between its endpoints, so
    a bond internal to the region contributes fully, a cut bond contributes
    half, and region operators over a partition of the sites sum to H.
    """
    inside = set(sites)
    n = device.n_sites
    HL = np.zeros((n, n), dtype=complex)
    for i in inside:
        HL[i, i] = H[i, i]
    for (i, j, _t) in device.bonds:
        w = (0.5 if i in inside else 0.0) + (0.5 if j in inside else 0.0)
        if w:
            HL[i, j] = w * H[i, j]
            HL[j, i] = w * H[j, i]
    return HL


def current_generator(H: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Flow generator ``J = -i[H, A]``; Tr(rho J) is the outflow of <A>."""
    return -1j * (H @ A - A @ H)


@dataclass(frozen=True)
class CutSpec:
    """A left/right partition of the device.

    ``cut_bonds`` are exactly the bonds with one endpoint in ``left_sites``,
    stored as ``(i in left, j not in left, hopping)``.  Positive currents flow
    left to right.
    """

    left_sites: frozenset
    cut_bonds: tuple

    @staticmethod
    def from_left_sites(device: DeviceSpec, left_sites: Iterable[int]) -> "CutSpec":
        left = frozenset(left_sites)
        cut = []
        for (i, j, t) in device.bonds:
            if (i in left) != (j in left):
                cut.append((i, j, t) if i in left else (j, i, t))
        return CutSpec(left, tuple(cut))


def central_partition(device: DeviceSpec, top_bond: int = 2, bottom_bond: int = 2) -> CutSpec:
    """Partition through both branches.

    ``top_bond``/``bottom_bond`` index the bond along each 5-site branch path
    (0..3, left to right); the default 2 cuts between the 3rd and 4th sites.
    The left side holds the hot lead plus the branch sites left of each cut.
    """
    nb = len(device.region_sites(Region.TOP_BRANCH)) - 1
    for name, b in (("top_bond", top_bond), ("bottom_bond", bottom_bond)):
        if not (0 <= b < nb):
            raise ValueError(f"{name} must be in 0..{nb - 1}, got {b}")

    def xpos(i):
        return device.sites[i].position[0]

    left = set(device.region_sites(Region.HOT_LEAD))
    top = sorted(device.region_sites(Region.TOP_BRANCH), key=xpos)
    bot = sorted(device.region_sites(Region.BOTTOM_BRANCH), key=xpos)
    left.update(top[: top_bond + 1])
    left.update(bot[: bottom_bond + 1])
    return CutSpec.from_left_sites(device, left)


def mirror_permutation(device: DeviceSpec, axis: str) -> np.ndarray:
    """Site permutation of the top<->bottom ('y') or left<->right ('x') mirror.

    Returns ``perm`` with ``perm[i]`` = image of site i; raises if the mirror
    does not map the site positions onto themselves.
    """
    ax = 0 if axis == "x" else 1
    cen = device.centroid()

    def keyed(pos):
        return (round(pos[0], 9), round(pos[1], 9))

    lookup = {keyed(s.position): s.id for s in device.sites}
    perm = np.empty(device.n_sites, dtype=int)
    for s in device.sites:
        p = list(s.position)
        p[ax] = 2 * cen[ax] - p[ax]
        key = keyed(p)
        if key not in lookup:
            raise ValueError(f"device not symmetric under {axis}-mirror at site {s.id}")
        perm[s.id] = lookup[key]
    return perm
