"""TOML configuration parsing, validation and emission."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .lattice import EV, DeviceSpec, PhysParams, build_flat_device, build_ratchet_device


class ConfigError(ValueError):
    """Invalid configuration; the message carries the offending key path."""


_DEFAULTS = {
    "lattice_spacing": 1.0,
    "eps0_eV": 1.0,
    "hopping_eV": 0.5,
    "lambda_rel": 0.2,
    "kT_E_au": 0.008,
    "kdT_au": 0.0,
    "omega_c_au": None,
    "omega_floor_au": 5e-4,
    "mode": "hermitian",
}

_KNOWN_TOP = set(_DEFAULTS) | {"device", "observer", "sweep", "cut"}
_KNOWN_OBSERVER = {"site", "gamma"}
_KNOWN_SWEEP = {"gamma_max", "gamma_steps", "kdT_max", "kdT_steps"}
_KNOWN_CUT = {"top_bond", "bottom_bond"}


@dataclass(frozen=True)
class SweepGrid:
    """Axes of a (gamma_D, kdT) sweep.

    ``gamma_values`` is None when gamma_max was omitted; the sweep engine then
    auto-calibrates the range from the slowest thermal relaxation rate.
    """

    gamma_values: tuple | None
    gamma_steps: int
    kdT_values: tuple
    observer_site: int | None


@dataclass(frozen=True)
class Config:
    device_kind: str
    device: DeviceSpec
    params: PhysParams
    grid: SweepGrid
    cut_top: int
    cut_bottom: int
    text_hash: str


def _require(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _check_unknown(table, known, prefix=""):
    for key in table:
        if key not in known:
            raise ConfigError(f"{prefix}{key}: unknown key")


def resolve_site(device: DeviceSpec, site, path="observer.site") -> int:
    if isinstance(site, str):
        if site not in device.named:
            raise ConfigError(f"{path}: unknown site name {site!r} (use alpha/beta/gamma/delta or an id)")
        return device.named[site]
    if isinstance(site, int) and not isinstance(site, bool):
        _require(0 <= site < device.n_sites, path, f"site id {site} out of range 0..{device.n_sites - 1}")
        return site
    raise ConfigError(f"{path}: must be a site name or integer id")


def parse_config(text: str) -> Config:
    """Parse and fully validate a configuration document."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"syntax error: {exc}") from exc

    _check_unknown(raw, _KNOWN_TOP)
    _require("device" in raw, "device", "required key is missing")
    kind = raw["device"]
    _require(kind in ("flat", "ratchet"), "device", f"must be 'flat' or 'ratchet', got {kind!r}")

    vals = dict(_DEFAULTS)
    for key in _DEFAULTS:
        if key in raw:
            vals[key] = raw[key]

    for key in ("lattice_spacing", "eps0_eV", "hopping_eV", "lambda_rel",
                "kT_E_au", "kdT_au", "omega_floor_au"):
        _require(isinstance(vals[key], (int, float)), key, "must be a number")
    _require(vals["kT_E_au"] > 0, "kT_E_au", "must be positive")
    _require(vals["kdT_au"] >= 0, "kdT_au", "must be non-negative")
    _require(vals["kdT_au"] < vals["kT_E_au"], "kdT_au",
             "temperature of cold bath must be positive (kdT < kT_E)")
    _require(vals["omega_floor_au"] > 0, "omega_floor_au", "must be positive")
    if vals["omega_c_au"] is not None:
        _require(isinstance(vals["omega_c_au"], (int, float)) and vals["omega_c_au"] > 0,
                 "omega_c_au", "must be a positive number")
    _require(vals["mode"] in ("hermitian", "literal"), "mode", "must be 'hermitian' or 'literal'")

    obs = raw.get("observer", {})
    _check_unknown(obs, _KNOWN_OBSERVER, "observer.")
    gamma = obs.get("gamma", 0.0)
    _require(isinstance(gamma, (int, float)) and gamma >= 0, "observer.gamma", "must be >= 0")

    sw = raw.get("sweep", {})
    _check_unknown(sw, _KNOWN_SWEEP, "sweep.")
    gamma_max = sw.get("gamma_max")
    gamma_steps = sw.get("gamma_steps", 21)
    kdT_max = sw.get("kdT_max", 2e-3)
    kdT_steps = sw.get("kdT_steps", 21)
    _require(isinstance(gamma_steps, int) and gamma_steps >= 1, "sweep.gamma_steps", "must be an integer >= 1")
    _require(isinstance(kdT_steps, int) and kdT_steps >= 1, "sweep.kdT_steps", "must be an integer >= 1")
    if gamma_max is not None:
        _require(isinstance(gamma_max, (int, float)) and gamma_max >= 0, "sweep.gamma_max", "must be >= 0")
    _require(isinstance(kdT_max, (int, float)) and kdT_max >= 0, "sweep.kdT_max", "must be >= 0")
    _require(kdT_max < vals["kT_E_au"], "sweep.kdT_max", "must stay below kT_E_au")

    cut = raw.get("cut", {})
    _check_unknown(cut, _KNOWN_CUT, "cut.")
    cut_top = cut.get("top_bond", 2)
    cut_bottom = cut.get("bottom_bond", 2)
    for name, b in (("cut.top_bond", cut_top), ("cut.bottom_bond", cut_bottom)):
        _require(isinstance(b, int) and 0 <= b <= 3, name, "must be an integer bond index in 0..3")

    eps0 = vals["eps0_eV"] * EV
    base = PhysParams(
        eps0=eps0,
        hopping=vals["hopping_eV"] * EV,
        lam=vals["lambda_rel"] * math.sqrt(eps0),
        kT_E=vals["kT_E_au"],
        kdT=vals["kdT_au"],
        omega_c=vals["omega_c_au"],
        omega_floor=vals["omega_floor_au"],
        dissipator_mode=vals["mode"],
    )
    builder = build_flat_device if kind == "flat" else build_ratchet_device
    device = builder(base, lattice_spacing=vals["lattice_spacing"])

    observer_site = None
    if "site" in obs:
        observer_site = resolve_site(device, obs["site"])
    params = base.with_(gamma_D=float(gamma), observer_site=observer_site)

    def linspace(maxval, steps):
        if steps == 1:
            return (0.0,)
        return tuple(maxval * i / (steps - 1) for i in range(steps))

    grid = SweepGrid(
        gamma_values=None if gamma_max is None else linspace(float(gamma_max), gamma_steps),
        gamma_steps=gamma_steps,
        kdT_values=linspace(float(kdT_max), kdT_steps),
        observer_site=observer_site,
    )
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Config(kind, device, params, grid, cut_top, cut_bottom, digest)


def emit_config(cfg: Config) -> str:
    """Render a Config back to the TOML schema; re-parsing gives an identical device."""
    p = cfg.params
    lines = [
        f'device = "{cfg.device_kind}"',
        f"lattice_spacing = {cfg.device.lattice_spacing!r}",
        f"eps0_eV = {p.eps0 / EV!r}",
        f"hopping_eV = {p.hopping / EV!r}",
        f"lambda_rel = {p.lam / math.sqrt(p.eps0)!r}",
        f"kT_E_au = {p.kT_E!r}",
        f"kdT_au = {p.kdT!r}",
        f"omega_floor_au = {p.omega_floor!r}",
        f'mode = "{p.dissipator_mode}"',
    ]
    if p.omega_c is not None:
        lines.append(f"omega_c_au = {p.omega_c!r}")
    if p.observer_site is not None or p.gamma_D:
        lines.append("")
        lines.append("[observer]")
        if p.observer_site is not None:
            lines.append(f"site = {p.observer_site}")
        lines.append(f"gamma = {p.gamma_D!r}")
    g = cfg.grid
    lines += ["", "[sweep]"]
    if g.gamma_values is not None:
        lines.append(f"gamma_max = {g.gamma_values[-1]!r}")
    lines.append(f"gamma_steps = {g.gamma_steps}")
    lines.append(f"kdT_max = {g.kdT_values[-1]!r}")
    lines.append(f"kdT_steps = {len(g.kdT_values)}")
    lines += ["", "[cut]", f"top_bond = {cfg.cut_top}", f"bottom_bond = {cfg.cut_bottom}"]
    return "\n".join(lines) + "\n"
