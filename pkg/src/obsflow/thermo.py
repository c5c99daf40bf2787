"""Currents, heat flows, entropy flows and entropy production.

Sign conventions, fixed here once for the whole package:

* Heat flows ``Qdot`` are energy per unit time flowing INTO the system from a
  channel (bath or observer).  At steady state they sum to zero.
* Entropy flow ``Phi_alpha = Qdot_alpha / kT_alpha`` is the entropy per unit
  time entering the system from bath alpha (dimensionless entropy, natural
  log); at steady state ``Phi_H + Phi_C = -P_prod``.
* Entropy production ``P_prod = -(Qdot_H/kT_H + Qdot_C/kT_C) >= 0``.
* Currents through a cut are positive when flowing left to right; a positive
  top-branch particle current is a clockwise ring current.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .bath import DissipatorChannel, ObserverChannel, apply_dissipator, observer_channel
from .lattice import DeviceSpec, Region
from .operators import CutSpec, current_generator, region_energy_operator, region_number_operator


def _restricted_expectation(rho: np.ndarray, J: np.ndarray, restrict) -> float:
    """Tr(rho J), optionally keeping only the block of J supported on a site set."""
    if restrict is not None:
        idx = np.asarray(sorted(restrict))
        mask = np.zeros_like(J, dtype=bool)
        mask[np.ix_(idx, idx)] = True
        J = np.where(mask, J, 0.0)
    return float(np.trace(rho @ J).real)


def particle_current(rho, device: DeviceSpec, H, cut: CutSpec, restrict=None) -> float:
    """Particle current through the cut, ``Tr(rho (-i)[H, N_L])``.

    With ``restrict`` set to one branch's sites, only that branch's crossing
    bond contributes, giving the single-branch bond current.
    """
    NL = region_number_operator(device, cut.left_sites)
    J = current_generator(H, NL)
    return _restricted_expectation(rho, J, restrict)


def energy_current(rho, device: DeviceSpec, H, cut: CutSpec, restrict=None) -> float:
    """Energy current through the cut, ``Tr(rho (-i)[H, H_L])``.

    The commutator is supported near the crossing bonds only, so restricting
    to one branch's sites isolates that branch's energy current.
    """
    HL = region_energy_operator(device, H, cut.left_sites)
    J = current_generator(H, HL)
    return _restricted_expectation(rho, J, restrict)


def branch_currents(rho, device: DeviceSpec, H, cut: CutSpec):
    """(j_p_up, j_h_up, j_h_down) at the configured branch cuts."""
    top = device.region_sites(Region.TOP_BRANCH)
    bot = device.region_sites(Region.BOTTOM_BRANCH)
    return (
        particle_current(rho, device, H, cut, restrict=top),
        energy_current(rho, device, H, cut, restrict=top),
        energy_current(rho, device, H, cut, restrict=bot),
    )


def channel_heat_flow(rho, H, ch: DissipatorChannel, mode: str = "hermitian") -> float:
    """Energy flow into the system from one channel: Tr(H D_ch[rho])."""
    return float(np.trace(H @ apply_dissipator(ch, rho, mode)).real)


def entropy_flow(qdot_into: float, kT: float) -> float:
    """Entropy per unit time entering the system from a bath at kT."""
    if kT <= 0:
        raise ValueError("kT must be positive")
    return qdot_into / kT


def entropy_production(qdot_H: float, qdot_C: float, kT_H: float, kT_C: float) -> float:
    """Irreversible entropy production rate; non-negative at steady state."""
    return -(qdot_H / kT_H + qdot_C / kT_C)


def observer_entropy_flow(rho, device: DeviceSpec, k: int, gamma_D: float, eta: float = 1e-3) -> float:
    """Entropy flow from the observer channel: ``-Tr(D_obs[rho] ln sigma)``.

    The observer's stationary state (the site projector) is regularized as
    ``(1 - eta) P + eta I/N`` since the log of a rank-1 projector is singular.
    The result vanishes for every rho and eta: the dissipator output has zero
    diagonal while ln sigma is diagonal in a basis containing site k.
    """
    if not (0.0 < eta < 1.0):
        raise ValueError("eta must be in (0, 1)")
    if gamma_D == 0.0:
        return 0.0
    n = device.n_sites
    ch = observer_channel(device, k, gamma_D)
    D = apply_dissipator(ch, rho)
    log_diag = np.full(n, np.log(eta / n))
    log_diag[k] = np.log(1.0 - eta + eta / n)
    return -float(np.sum(np.diag(D).real * log_diag))


def vn_entropy(rho) -> float:
    """Von Neumann entropy -sum p ln p; tiny negative eigenvalues are clamped."""
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    w = np.clip(w.real, 0.0, None)
    nz = w[w > 0]
    return float(-np.sum(nz * np.log(nz)))


@dataclass(frozen=True)
class ObservablesRecord:
    """One steady-state row of the sweep output (all values atomic units)."""

    gamma_D: float
    kdT: float
    j_p_up: float
    j_h_up: float
    j_h_down: float
    Qdot_H: float
    Qdot_C: float
    Qdot_D: float
    Phi_H: float
    Phi_C: float
    P_prod: float
    S_vn: float
    residual: float
    min_eig: float

    @staticmethod
    def field_names() -> list[str]:
        return [f.name for f in fields(ObservablesRecord)]
