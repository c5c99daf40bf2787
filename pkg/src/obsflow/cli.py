"""Command-line interface: steady, sweep, validate and propagate subcommands."""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .config import Config, ConfigError, parse_config
from .dynamics import PropagationError, SteadyStateError, propagate, steady_state, validate_state, vec
from .sweep import (
    SweepError,
    SolverContext,
    emit_csv,
    emit_heatmap,
    run_steady,
    run_sweep,
)
from .thermo import ObservablesRecord
from .validate import run_validate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2

WORKERS_ENV = "OBSFLOW_WORKERS"


def _load_config(path: str) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _print_record(rec: ObservablesRecord) -> None:
    for name in ObservablesRecord.field_names():
        print(f"{name} = {getattr(rec, name)!r}")


def _cmd_steady(args) -> int:
    cfg = _load_config(args.config)
    rec = run_steady(cfg)
    _print_record(rec)
    if args.out:
        from .sweep import SweepResult
        from .config import SweepGrid

        grid = SweepGrid((rec.gamma_D,), 1, (rec.kdT,), cfg.params.observer_site)
        emit_csv(SweepResult(grid, (rec,), {"config_hash": cfg.text_hash}), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    result = run_sweep(cfg, workers=args.workers, keep_going=args.keep_going)
    emit_csv(result, args.out)
    print(f"wrote {len(result.rows)} rows to {args.out}")
    if args.heatmap:
        img = args.img or (args.out + f".{args.heatmap}.png")
        written = emit_heatmap(result, args.heatmap, img)
        print(f"wrote heatmap to {written}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = _load_config(args.config)
    report = run_validate(cfg)
    for c in report.checks:
        status = "PASS" if c.passed else ("INFO" if c.informational else "FAIL")
        print(f"[{status}] {c.name}: value={c.value:.3e} tol={c.tol:.1e}")
    print("validation " + ("passed" if report.passed else "FAILED"))
    return EXIT_OK if report.passed else EXIT_SOLVER


def _cmd_propagate(args) -> int:
    cfg = _load_config(args.config)
    ctx = SolverContext(cfg)
    L = ctx.liouvillian(cfg.params.gamma_D, cfg.params.kdT)
    n = ctx.device.n_sites
    rho0 = np.eye(n, dtype=complex) / n
    rho = propagate(rho0, L, args.t, args.dt)
    diag = validate_state(rho)
    for k, v in diag.items():
        print(f"{k} = {v!r}")
    print(f"liouvillian_residual = {float(np.linalg.norm(L @ vec(rho)))!r}")
    ref = steady_state(L).rho_ss
    print(f"max_abs_deviation_from_nullspace_state = {float(np.max(np.abs(rho - ref)))!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="obsflow",
        description="Steady-state transport in a two-branch nanodevice under "
        "thermal baths and a local quantum observer.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="enable info logging")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("steady", help="single steady-state solve")
    ps.add_argument("--config", required=True)
    ps.add_argument("--out", help="optional CSV output path")
    ps.set_defaults(func=_cmd_steady)

    pw = sub.add_parser("sweep", help="(gamma_D, kdT) grid sweep")
    pw.add_argument("--config", required=True)
    pw.add_argument("--out", required=True, help="CSV output path")
    pw.add_argument("--heatmap", metavar="COLUMN", help="also render a heatmap of COLUMN")
    pw.add_argument("--img", help="heatmap image path")
    pw.add_argument("--workers", type=int, default=_default_workers())
    pw.add_argument("--keep-going", action="store_true",
                    help="mark failed points as NaN rows instead of aborting")
    pw.set_defaults(func=_cmd_sweep)

    pv = sub.add_parser("validate", help="run the built-in validation suite")
    pv.add_argument("--config", required=True)
    pv.set_defaults(func=_cmd_validate)

    pp = sub.add_parser("propagate", help="RK4 time propagation from the maximally mixed state")
    pp.add_argument("--config", required=True)
    pp.add_argument("--t", type=float, required=True, help="final time (a.u.)")
    pp.add_argument("--dt", type=float, required=True, help="time step (a.u.)")
    pp.set_defaults(func=_cmd_propagate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SteadyStateError, SweepError, PropagationError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
