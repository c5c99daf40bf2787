"""Vectorized Liouvillian, steady-state solve and RK4 time propagation.

Density matrices are column-stacked: ``vec(rho) = rho.flatten(order='F')``,
so ``vec(A rho B) = kron(B.T, A) vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bath import DissipatorChannel, ObserverChannel, ThermalChannel, apply_dissipator

RESIDUAL_REL_TOL = 1e-9
NEGATIVITY_TOL = 1e-8
NULLSPACE_GAP_MIN = 1e4


class SteadyStateError(RuntimeError):
    pass


class PropagationError(RuntimeError):
    pass


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.flatten(order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(v.size)))
    return v.reshape((n, n), order="F")


def liouvillian_action(H, channels, rho, mode="hermitian") -> np.ndarray:
    """Direct matrix-form evaluation of the master equation's right side.

    Kept algorithmically independent of :func:`assemble_liouvillian`; used as
    its oracle in the tests.
    """
    out = -1j * (H @ rho - rho @ H)
    for ch in channels:
        out = out + apply_dissipator(ch, rho, mode)
    return out


def _superop_terms(ch: DissipatorChannel, mode: str, eye: np.ndarray) -> np.ndarray:
    if isinstance(ch, ObserverChannel):
        P = ch.P
        g2 = ch.gamma_D**2
        return g2 * (2.0 * np.kron(P.T, P) - np.kron(eye, P) - np.kron(P.T, eye))
    assert isinstance(ch, ThermalChannel)
    S, K = ch.S, ch.K
    Kd = K.conj().T if mode == "hermitian" else K
    return (
        np.kron(S.T, K)
        + np.kron(Kd.T, S)
        - np.kron(eye, S @ K)
        - np.kron((Kd @ S).T, eye)
    )


def assemble_liouvillian(H: np.ndarray, channels, mode: str = "hermitian") -> np.ndarray:
    """Dense superoperator L with ``L vec(rho) = vec(drho/dt)``."""
    n = H.shape[0]
    for ch in channels:
        dim = ch.P.shape[0] if isinstance(ch, ObserverChannel) else ch.S.shape[0]
        if dim != n:
            raise ValueError(f"channel dimension {dim} does not match H dimension {n}")
    eye = np.eye(n, dtype=complex)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for ch in channels:
        L = L + _superop_terms(ch, mode, eye)
    return L


@dataclass(frozen=True)
class SteadyStateReport:
    rho_ss: np.ndarray
    residual: float
    sigma_max: float
    nullspace_dim: int
    min_eigenvalue: float
    hermiticity_defect: float


def steady_state(L: np.ndarray) -> SteadyStateReport:
    """Steady state from the singular vector of the smallest singular value.

    Raises if the numerical null space is not one-dimensional or the residual
    exceeds ``RESIDUAL_REL_TOL * sigma_max``.
    """
    U, s, Vh = scipy.linalg.svd(L, lapack_driver="gesdd")
    sigma_max = float(s[0])
    null_dim = int(np.count_nonzero(s <= RESIDUAL_REL_TOL * sigma_max))
    # A well-separated smallest singular value identifies a unique steady state
    # even when the absolute threshold sweeps in near-stationary slow modes.
    if null_dim > 1:
        if s[-2] <= NULLSPACE_GAP_MIN * s[-1]:
            raise SteadyStateError(
                f"steady state is not unique: nullspace dimension {null_dim}, "
                f"two smallest singular values {s[-1]:.3e}, {s[-2]:.3e}"
            )
        null_dim = 1
    rho = unvec(Vh[-1].conj())
    hdefect = float(np.max(np.abs(rho - rho.conj().T)))
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-300:
        raise SteadyStateError("null vector has zero trace; cannot normalize")
    rho = rho / tr
    residual = float(np.linalg.norm(L @ vec(rho)))
    if residual > RESIDUAL_REL_TOL * sigma_max:
        raise SteadyStateError(
            f"residual {residual:.3e} exceeds {RESIDUAL_REL_TOL:.0e} * sigma_max ({sigma_max:.3e})"
        )
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    return SteadyStateReport(rho, residual, sigma_max, null_dim, min_eig, hdefect)


def propagate(rho0: np.ndarray, L: np.ndarray, t_final: float, dt: float) -> np.ndarray:
    """Classical RK4 integration of ``drho/dt = L[rho]``.

    Stability requires dt * sigma_max(L) below the RK4 stability bound; the
    documented safe choice is ``dt * sigma_max <= 0.1``.  Blow-up aborts with
    step diagnostics.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = vec(rho0).astype(complex)
    norm0 = max(np.linalg.norm(v), 1.0)
    t = 0.0
    nsteps = int(np.ceil(t_final / dt)) if t_final > 0 else 0
    for step in range(nsteps):
        h = min(dt, t_final - t)
        k1 = L @ v
        k2 = L @ (v + 0.5 * h * k1)
        k3 = L @ (v + 0.5 * h * k2)
        k4 = L @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        if step % 1000 == 0 or step == nsteps - 1:
            nrm = np.linalg.norm(v)
            if not np.isfinite(nrm) or nrm > 1e6 * norm0:
                raise PropagationError(
                    f"propagation unstable at step {step} (t={t:.3g}): ||vec(rho)||={nrm:.3e}"
                )
    return unvec(v)


def decay_rates(L: np.ndarray, zero_tol: float = 1e-10):
    """Relaxation rates -Re(eigenvalues) of L; returns (rates, slowest nonzero)."""
    ev = np.linalg.eigvals(L)
    rates = -ev.real
    scale = max(float(np.max(np.abs(ev))), 1.0)
    nonzero = rates[rates > zero_tol * scale]
    if nonzero.size == 0:
        raise SteadyStateError("no decaying modes found")
    return rates, float(np.min(nonzero))


def validate_state(rho: np.ndarray) -> dict:
    """Diagnostics of a density matrix; never raises."""
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr_dev = float(abs(np.trace(rho) - 1.0))
    sym = 0.5 * (rho + rho.conj().T)
    w = np.linalg.eigvalsh(sym)
    purity = float((sym @ sym).trace().real)
    return {
        "hermiticity_defect": herm,
        "trace_deviation": tr_dev,
        "min_eigenvalue": float(w[0]),
        "purity": purity,
    }
