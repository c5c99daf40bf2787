"""Steady-state solves over (gamma_D, kdT) grids and result serialization."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .bath import observer_channel, thermal_channels
from .config import Config, SweepGrid
from .dynamics import (
    NEGATIVITY_TOL,
    SteadyStateError,
    assemble_liouvillian,
    decay_rates,
    steady_state,
)
from .operators import assemble_hamiltonian, central_partition, eigendecompose
from .thermo import (
    ObservablesRecord,
    branch_currents,
    channel_heat_flow,
    entropy_flow,
    entropy_production,
    vn_entropy,
)

log = logging.getLogger(__name__)

CSV_HEADER = "gamma_D,kdT,j_p_up,j_h_up,j_h_down,Qdot_H,Qdot_C,Qdot_D,Phi_H,Phi_C,P_prod,S_vn,residual,min_eig"


class SweepError(RuntimeError):
    pass


class SolverContext:
    """Per-configuration state shared across sweep points.

    The Hamiltonian, its spectral decomposition and the observer superoperator
    are gamma/kdT independent; the thermal Liouvillian is cached per kdT.
    """

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.device = cfg.device
        self.params = cfg.params
        self.mode = cfg.params.dissipator_mode
        self.H = assemble_hamiltonian(self.device)
        self.spec = eigendecompose(self.H)
        self.cut = central_partition(self.device, cfg.cut_top, cfg.cut_bottom)
        if cfg.params.observer_site is not None:
            self._obs_unit = observer_channel(self.device, cfg.params.observer_site, 1.0)
            self._L_obs_unit = assemble_liouvillian(
                np.zeros_like(self.H), [self._obs_unit], self.mode
            )
        else:
            self._obs_unit = None
            self._L_obs_unit = None
        self._thermal_cache: dict[float, tuple] = {}

    def thermal_parts(self, kdT: float):
        """(thermal channels, Liouvillian without observer) at gradient kdT."""
        if kdT not in self._thermal_cache:
            params = self.params.with_(kdT=kdT, gamma_D=0.0, observer_site=None)
            chans = thermal_channels(self.device, params, self.spec)
            L = assemble_liouvillian(self.H, chans, self.mode)
            self._thermal_cache[kdT] = (chans, L)
        return self._thermal_cache[kdT]

    def liouvillian(self, gamma_D: float, kdT: float) -> np.ndarray:
        _, L = self.thermal_parts(kdT)
        if gamma_D > 0:
            if self._L_obs_unit is None:
                raise SweepError("gamma_D > 0 requires an observer site in the config")
            L = L + gamma_D**2 * self._L_obs_unit
        return L

    def solve_point(self, gamma_D: float, kdT: float) -> ObservablesRecord:
        chans, _ = self.thermal_parts(kdT)
        L = self.liouvillian(gamma_D, kdT)
        report = steady_state(L)
        rho = report.rho_ss
        if report.min_eigenvalue < -NEGATIVITY_TOL:
            log.warning(
                "steady state at (gamma_D=%g, kdT=%g) has negativity %.3e beyond the "
                "Redfield tolerance", gamma_D, kdT, report.min_eigenvalue,
            )
        j_p_up, j_h_up, j_h_down = branch_currents(rho, self.device, self.H, self.cut)
        qdot_H = sum(channel_heat_flow(rho, self.H, ch, self.mode) for ch in chans if ch.label == "hot")
        qdot_C = sum(channel_heat_flow(rho, self.H, ch, self.mode) for ch in chans if ch.label == "cold")
        qdot_D = 0.0
        if self._obs_unit is not None and gamma_D > 0:
            obs = replace(self._obs_unit, gamma_D=gamma_D)
            qdot_D = channel_heat_flow(rho, self.H, obs, self.mode)
        kT_H = self.params.kT_E + kdT
        kT_C = self.params.kT_E - kdT
        return ObservablesRecord(
            gamma_D=gamma_D,
            kdT=kdT,
            j_p_up=j_p_up,
            j_h_up=j_h_up,
            j_h_down=j_h_down,
            Qdot_H=qdot_H,
            Qdot_C=qdot_C,
            Qdot_D=qdot_D,
            Phi_H=entropy_flow(qdot_H, kT_H),
            Phi_C=entropy_flow(qdot_C, kT_C),
            P_prod=entropy_production(qdot_H, qdot_C, kT_H, kT_C),
            S_vn=vn_entropy(rho),
            residual=report.residual,
            min_eig=report.min_eigenvalue,
        )

    def calibrate_gamma_max(self) -> float:
        """Gamma range endpoint: the observer rate 2 gamma^2 reaches 100x the
        slowest thermal relaxation rate at gamma_D = 0, kdT = 0."""
        _, L0 = self.thermal_parts(0.0)
        _, gamma_slow = decay_rates(L0)
        gmax = math.sqrt(50.0 * gamma_slow)
        log.info("auto-calibrated gamma_max = %.6g (slowest thermal rate %.6g)", gmax, gamma_slow)
        return gmax


@dataclass(frozen=True)
class SweepResult:
    grid: SweepGrid
    rows: tuple
    provenance: dict


def run_steady(cfg: Config) -> ObservablesRecord:
    """Single steady-state solve at the config's gamma_D and kdT."""
    ctx = SolverContext(cfg)
    try:
        return ctx.solve_point(cfg.params.gamma_D, cfg.params.kdT)
    except SteadyStateError as exc:
        raise SweepError(
            f"steady solve failed at gamma_D={cfg.params.gamma_D}, kdT={cfg.params.kdT}: {exc}"
        ) from exc


def _nan_record(gamma_D, kdT):
    nan = float("nan")
    return ObservablesRecord(gamma_D, kdT, *([nan] * 12))


def run_sweep(cfg: Config, workers: int = 1, keep_going: bool = False) -> SweepResult:
    """One steady solve per grid point, ordered kdT-outer / gamma-inner.

    Points execute concurrently up to ``workers``; output order and values are
    schedule-independent.
    """
    ctx = SolverContext(cfg)
    grid = cfg.grid
    if grid.gamma_values is None:
        gmax = ctx.calibrate_gamma_max()
        steps = grid.gamma_steps
        gammas = tuple(gmax * i / (steps - 1) for i in range(steps)) if steps > 1 else (0.0,)
        grid = replace(grid, gamma_values=gammas)
    points = [(kdT, g) for kdT in grid.kdT_values for g in grid.gamma_values]
    # prime the per-kdT thermal cache serially: the cache dict is not locked
    for kdT in grid.kdT_values:
        ctx.thermal_parts(kdT)

    def solve(point):
        kdT, g = point
        try:
            return ctx.solve_point(g, kdT)
        except SteadyStateError as exc:
            if keep_going:
                log.error("point (gamma_D=%g, kdT=%g) failed: %s", g, kdT, exc)
                return _nan_record(g, kdT)
            raise SweepError(f"sweep failed at gamma_D={g}, kdT={kdT}: {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(solve, points))
    else:
        rows = tuple(solve(p) for p in points)
    provenance = {"config_hash": cfg.text_hash, "version": __version__}
    return SweepResult(grid, rows, provenance)


def format_value(x: float) -> str:
    return repr(float(x))


def emit_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        _write_csv(result, fh)


def _write_csv(result: SweepResult, fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for row in result.rows:
        fh.write(",".join(format_value(getattr(row, name)) for name in ObservablesRecord.field_names()))
        fh.write("\n")


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    _write_csv(result, buf)
    return buf.getvalue()


def parse_csv(text: str) -> list[ObservablesRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER.split(","):
        raise SweepError(f"unexpected CSV header: {reader.fieldnames}")
    return [ObservablesRecord(**{k: float(v) for k, v in row.items()}) for row in reader]


def heatmap_grid(result: SweepResult, column: str):
    """(gammas, kdTs, 2D array indexed [kdT, gamma]) for one observable column."""
    if column not in ObservablesRecord.field_names():
        raise SweepError(f"unknown column {column!r}")
    gammas = np.asarray(result.grid.gamma_values)
    kdTs = np.asarray(result.grid.kdT_values)
    Z = np.array([getattr(r, column) for r in result.rows]).reshape(kdTs.size, gammas.size)
    return gammas, kdTs, Z


def emit_heatmap(result: SweepResult, column: str, path) -> str:
    """Render a diverging heatmap centered at zero; falls back to a plain
    plot-data grid file when matplotlib is unavailable.  Returns the path written."""
    gammas, kdTs, Z = heatmap_grid(result, column)
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        data_path = str(path) + ".dat"
        with open(data_path, "w") as fh:
            fh.write(f"# {column} grid; rows = kdT (a.u.), cols = gamma_D (a.u.)\n")
            fh.write("# gamma_D: " + " ".join(map(format_value, gammas)) + "\n")
            fh.write("# kdT: " + " ".join(map(format_value, kdTs)) + "\n")
            np.savetxt(fh, Z)
        return data_path
    vmax = float(np.nanmax(np.abs(Z))) or 1.0
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(gammas, kdTs, Z, cmap="RdBu_r", vmin=-vmax, vmax=vmax, shading="nearest")
    fig.colorbar(mesh, ax=ax, label=f"{column} (a.u.)")
    ax.set_xlabel(r"$\gamma_D$ (a.u.)")
    ax.set_ylabel(r"$k_B\Delta T$ (a.u.)")
    ax.set_title(column)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
