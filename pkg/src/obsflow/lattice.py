"""Device geometry, physical parameters and unit conversions.

Everything internal is expressed in Hartree atomic units; conversions to
eV / kelvin / ampere happen only at I/O boundaries via :func:`convert_units`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

# CODATA 2018
HARTREE_EV = 27.211386245988          # eV per hartree
KB_HARTREE_PER_K = 3.166811563e-6     # hartree per kelvin
AU_CURRENT_A = 6.623618237510e-3      # ampere per atomic unit of current

EV = 1.0 / HARTREE_EV                 # hartree per eV


class Region(str, Enum):
    HOT_LEAD = "hot_lead"
    COLD_LEAD = "cold_lead"
    TOP_BRANCH = "top_branch"
    BOTTOM_BRANCH = "bottom_branch"


class UnitError(ValueError):
    """Unsupported unit pair in convert_units."""


_CONVERSIONS = {
    ("eV", "hartree"): EV,
    ("hartree", "eV"): HARTREE_EV,
    ("kelvin", "hartree"): KB_HARTREE_PER_K,
    ("hartree", "kelvin"): 1.0 / KB_HARTREE_PER_K,
    ("au_current", "ampere"): AU_CURRENT_A,
    ("ampere", "au_current"): 1.0 / AU_CURRENT_A,
}


def convert_units(value: float, from_unit: str, to_unit: str) -> float:
    """Convert between eV/hartree, kelvin/hartree (via k_B) and current units."""
    if from_unit == to_unit:
        return value
    try:
        factor = _CONVERSIONS[(from_unit, to_unit)]
    except KeyError:
        raise UnitError(f"unsupported unit pair: {from_unit!r} -> {to_unit!r}") from None
    return value * factor


@dataclass(frozen=True)
class SiteSpec:
    """One lattice site: index, 2D position (bohr), on-site energy (hartree)."""

    id: int
    position: tuple[float, float]
    onsite: float
    region: Region


@dataclass(frozen=True)
class DeviceSpec:
    """The lattice graph of the two-branch transport device.

    ``bonds`` are ``(i, j, hopping)`` with ``i < j`` and hopping in hartree
    (the Hamiltonian off-diagonal is minus the hopping).  ``named`` maps the
    four branch-end labels alpha/beta/gamma/delta to site ids.
    """

    sites: tuple[SiteSpec, ...]
    bonds: tuple[tuple[int, int, float], ...]
    named: dict = field(default_factory=dict)
    lattice_spacing: float = 1.0

    def __post_init__(self):
        n = len(self.sites)
        ids = [s.id for s in self.sites]
        if ids != list(range(n)):
            raise ValueError("site ids must be contiguous 0..N-1 in order")
        seen = set()
        for (i, j, t) in self.bonds:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"bond ({i},{j}) has invalid endpoint")
            if i == j:
                raise ValueError(f"self-bond at site {i}")
            if i > j:
                raise ValueError(f"bond ({i},{j}) must be ordered i<j")
            if (i, j) in seen:
                raise ValueError(f"duplicate bond ({i},{j})")
            seen.add((i, j))

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def region_sites(self, region: Region) -> tuple[int, ...]:
        return tuple(s.id for s in self.sites if s.region == region)

    def neighbors(self, i: int) -> list[int]:
        out = []
        for (a, b, _t) in self.bonds:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return out

    def is_connected(self) -> bool:
        if not self.sites:
            return True
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in self.neighbors(i):
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == self.n_sites

    def centroid(self) -> tuple[float, float]:
        n = self.n_sites
        return (
            sum(s.position[0] for s in self.sites) / n,
            sum(s.position[1] for s in self.sites) / n,
        )

    def validate_transport_geometry(self) -> None:
        """Check the constraints specific to the 28-site two-branch layout."""
        if len(self.region_sites(Region.HOT_LEAD)) != 9:
            raise ValueError("expected exactly 9 hot-lead sites")
        if len(self.region_sites(Region.COLD_LEAD)) != 9:
            raise ValueError("expected exactly 9 cold-lead sites")
        if not self.is_connected():
            raise ValueError("device graph is not connected")
        for region in (Region.TOP_BRANCH, Region.BOTTOM_BRANCH):
            sites = set(self.region_sites(region))
            # branch restricted to itself must be a simple path
            deg = {i: 0 for i in sites}
            nb = 0
            for (a, b, _t) in self.bonds:
                if a in sites and b in sites:
                    deg[a] += 1
                    deg[b] += 1
                    nb += 1
            if nb != len(sites) - 1 or sorted(deg.values()) != [1, 1] + [2] * (len(sites) - 2):
                raise ValueError(f"{region.value} is not a simple path")
        for key in ("alpha", "beta", "gamma", "delta"):
            if key not in self.named:
                raise ValueError(f"missing named site {key!r}")

        def xpos(i):
            return self.sites[i].position[0]

        top = self.region_sites(Region.TOP_BRANCH)
        bot = self.region_sites(Region.BOTTOM_BRANCH)
        if self.named["alpha"] != min(top, key=xpos) or self.named["beta"] != max(top, key=xpos):
            raise ValueError("alpha/beta must be the leftmost/rightmost top-branch sites")
        if self.named["gamma"] != min(bot, key=xpos) or self.named["delta"] != max(bot, key=xpos):
            raise ValueError("gamma/delta must be the leftmost/rightmost bottom-branch sites")


@dataclass(frozen=True)
class PhysParams:
    """Model parameters in atomic units.

    ``lam`` is the system-bath coupling strength, ``kT_E`` the mean bath
    temperature and ``kdT`` the gradient, such that the hot/cold baths sit at
    ``kT_E +/- kdT``.  ``omega_c`` may be None, meaning "derive from the device
    spectrum" (twice the spectral width).  ``omega_floor`` is an infrared
    cutoff: Bohr frequencies below it carry no bath weight.  It regularizes
    the 1/Omega divergence of the thermal occupation between quasi-degenerate
    levels; the default sits well below kT_E but far above numerical level
    splittings.
    """

    eps0: float = 1.0 * EV
    hopping: float = 0.5 * EV
    lam: float = 0.2 * math.sqrt(1.0 * EV)
    kT_E: float = 0.008
    kdT: float = 0.0
    omega_c: float | None = None
    gamma_D: float = 0.0
    observer_site: int | None = None
    omega_floor: float = 5e-4
    dissipator_mode: str = "hermitian"

    def __post_init__(self):
        if not self.kT_E > self.kdT >= 0.0:
            raise ValueError("require kT_E > kdT >= 0 (cold bath must stay at positive temperature)")
        if self.omega_c is not None and self.omega_c <= 0:
            raise ValueError("omega_c must be positive")
        if self.gamma_D < 0:
            raise ValueError("gamma_D must be non-negative")
        if self.omega_floor <= 0:
            raise ValueError("omega_floor must be positive")
        if self.dissipator_mode not in ("hermitian", "literal"):
            raise ValueError(f"unknown dissipator mode {self.dissipator_mode!r}")

    @property
    def kT_hot(self) -> float:
        return self.kT_E + self.kdT

    @property
    def kT_cold(self) -> float:
        return self.kT_E - self.kdT

    def with_(self, **kwargs) -> "PhysParams":
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# device builders

_BRANCH_LEN = 5
_LEAD = 3  # leads are 3x3 blocks


def _build_device_spaced(params, top_onsite, bottom_onsite, spacing) -> DeviceSpec:
    sites: list[SiteSpec] = []
    pos_to_id: dict[tuple[int, int], int] = {}

    def add(x, y, onsite, region):
        i = len(sites)
        sites.append(SiteSpec(i, (x * spacing, y * spacing), onsite, region))
        pos_to_id[(x, y)] = i
        return i

    # left (hot) lead: x in 0..2, y in +1..-1
    for y in (1, 0, -1):
        for x in range(_LEAD):
            add(x, y, params.eps0, Region.HOT_LEAD)
    # top branch: x in 3..7, y = +1
    for k in range(_BRANCH_LEN):
        add(_LEAD + k, 1, top_onsite[k], Region.TOP_BRANCH)
    # bottom branch: x in 3..7, y = -1
    for k in range(_BRANCH_LEN):
        add(_LEAD + k, -1, bottom_onsite[k], Region.BOTTOM_BRANCH)
    # right (cold) lead: x in 8..10
    for y in (1, 0, -1):
        for x in range(_LEAD + _BRANCH_LEN, 2 * _LEAD + _BRANCH_LEN):
            add(x, y, params.eps0, Region.COLD_LEAD)

    t = params.hopping
    bonds = set()

    def bond(i, j):
        bonds.add((min(i, j), max(i, j), t))

    # nearest neighbours on the integer grid; the grid is sparse enough that
    # this yields exactly the lead blocks, branch paths and their attachments
    for (x, y), i in pos_to_id.items():
        for (dx, dy) in ((1, 0), (0, 1)):
            j = pos_to_id.get((x + dx, y + dy))
            if j is not None:
                bond(i, j)

    named = {
        "alpha": pos_to_id[(_LEAD, 1)],
        "beta": pos_to_id[(_LEAD + _BRANCH_LEN - 1, 1)],
        "gamma": pos_to_id[(_LEAD, -1)],
        "delta": pos_to_id[(_LEAD + _BRANCH_LEN - 1, -1)],
    }
    dev = DeviceSpec(tuple(sites), tuple(sorted(bonds)), named, spacing)
    dev.validate_transport_geometry()
    return dev


def build_flat_device(params: PhysParams, lattice_spacing: float = 1.0) -> DeviceSpec:
    """Uniform on-site device: 3x3 leads joined by two 5-site branches."""
    flat = [params.eps0] * _BRANCH_LEN
    return _build_device_spaced(params, flat, flat, lattice_spacing)


def build_ratchet_device(params: PhysParams, lattice_spacing: float = 1.0) -> DeviceSpec:
    """Same graph as the flat device with anti-parallel on-site energy ladders.

    Top branch rises 1.1 eV -> 1.5 eV left to right in 0.1 eV steps; the
    bottom branch is the mirror image.  Leads stay at ``eps0``.
    """
    ladder = [(1.1 + 0.1 * k) * EV for k in range(_BRANCH_LEN)]
    return _build_device_spaced(params, ladder, ladder[::-1], lattice_spacing)
