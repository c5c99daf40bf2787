"""Bath spectral weight, thermal kernel operators and observer channels.

The thermal dissipator is Redfield-like: for each bath a coupling operator S
(masked dipole) and a kernel K obtained by weighting S in the energy eigenbasis
with the bath spectral weight at each Bohr frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .lattice import DeviceSpec, PhysParams, Region
from .operators import SpectralDecomposition, dipole_coupling_operator, site_projector


def bose_einstein(omega: float, kT: float) -> float:
    """Bose-Einstein occupation 1/(exp(omega/kT) - 1); omega, kT > 0."""
    if omega <= 0:
        raise ValueError("bose_einstein requires omega > 0 (regularize first)")
    if kT <= 0:
        raise ValueError("bose_einstein requires kT > 0")
    x = omega / kT
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def spectral_weight(Omega, kT, omega_c, eps0, omega_floor):
    """Bath spectral weight at Bohr frequency Omega (hartree).

    Positive frequencies (absorption from the bath) carry n_B/eps0, negative
    frequencies (emission) carry (n_B + 1)/eps0; zero outside the cutoff and
    inside the infrared floor.  The n_B vs n_B+1 asymmetry encodes detailed
    balance and drives relaxation towards the Gibbs state.
    """
    a = abs(Omega)
    if a <= omega_floor or a >= omega_c:
        return 0.0
    n = bose_einstein(a, kT)
    return (n if Omega > 0 else n + 1.0) / eps0


def default_cutoff(spec: SpectralDecomposition) -> float:
    """Cutoff covering every Bohr frequency: twice the spectral width."""
    return 2.0 * float(spec.energies[-1] - spec.energies[0])


@dataclass(frozen=True)
class ThermalChannel:
    """One bath/polarization channel with coupling S and kernel K."""

    S: np.ndarray
    K: np.ndarray
    kT: float
    label: str  # "hot" | "cold"
    axis: str   # "x" | "y"


@dataclass(frozen=True)
class ObserverChannel:
    """Local dephasing at site k with strength gamma_D (no temperature)."""

    k: int
    gamma_D: float
    P: np.ndarray


DissipatorChannel = Union[ThermalChannel, ObserverChannel]


def assemble_kernel(
    S: np.ndarray,
    spec: SpectralDecomposition,
    kT: float,
    lam: float,
    omega_c: float,
    eps0: float,
    omega_floor: float,
) -> np.ndarray:
    """Kernel K in the site basis: lam^2 * S weighted by the spectral weight
    at each Bohr frequency E_m - E_n in the energy eigenbasis."""
    E = spec.energies
    St = spec.to_eigenbasis(S)
    n = E.size
    W = np.empty((n, n))
    for m in range(n):
        for k in range(n):
            W[m, k] = spectral_weight(E[m] - E[k], kT, omega_c, eps0, omega_floor)
    return spec.from_eigenbasis(lam * lam * W * St)


def thermal_channels(
    device: DeviceSpec, params: PhysParams, spec: SpectralDecomposition
) -> list[ThermalChannel]:
    """The four bath channels: (hot, cold) x (x, y) polarizations."""
    omega_c = params.omega_c if params.omega_c is not None else default_cutoff(spec)
    out = []
    for label, region, kT in (
        ("hot", Region.HOT_LEAD, params.kT_hot),
        ("cold", Region.COLD_LEAD, params.kT_cold),
    ):
        for axis in ("x", "y"):
            S = dipole_coupling_operator(device, region, axis)
            K = assemble_kernel(S, spec, kT, params.lam, omega_c, params.eps0, params.omega_floor)
            out.append(ThermalChannel(S, K, kT, label, axis))
    return out


def observer_channel(device: DeviceSpec, k: int, gamma_D: float) -> ObserverChannel:
    return ObserverChannel(k, gamma_D, site_projector(device, k))


def apply_dissipator(ch: DissipatorChannel, rho: np.ndarray, mode: str = "hermitian") -> np.ndarray:
    """Action of one channel's dissipator on rho.

    Thermal channels: ``K rho S + S rho K' - S K rho - rho K' S`` where K' is
    K in ``literal`` mode and K^dagger in ``hermitian`` mode (the conjugate
    completion preserves Hermiticity of rho; both coincide for Hermitian K).
    The observer channel damps the coherences of row/column k:
    ``gamma^2 (2 P rho P - P rho - rho P)``.
    """
    if isinstance(ch, ObserverChannel):
        P = ch.P
        g2 = ch.gamma_D**2
        PrP = P @ rho @ P
        Pr = P @ rho
        rP = rho @ P
        return g2 * (2.0 * PrP - Pr - rP)
    if mode == "hermitian":
        Kd = ch.K.conj().T
    elif mode == "literal":
        Kd = ch.K
    else:
        raise ValueError(f"unknown dissipator mode {mode!r}")
    S, K = ch.S, ch.K
    if rho.shape != S.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs channel {S.shape}")
    return K @ rho @ S + S @ rho @ Kd - S @ (K @ rho) - rho @ (Kd @ S)


def build_channels(device: DeviceSpec, params: PhysParams, spec: SpectralDecomposition) -> list[DissipatorChannel]:
    """All channels for one configuration: four thermal plus the optional observer."""
    chans: list[DissipatorChannel] = list(thermal_channels(device, params, spec))
    if params.observer_site is not None and params.gamma_D > 0:
        chans.append(observer_channel(device, params.observer_site, params.gamma_D))
    return chans
