"""Plain-text ``key = value`` run configuration with [grid], [physics], [scheme], [output].

Every key has a type and a default; unknown keys and bad values raise
:class:`~ssprkse.errors.ConfigError` naming the key and, when it came from a
file, the line.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..stepper import Scheme, SchemeConfig
from .scenario import Scenario, build_channel_scenario, build_periodic_scenario


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.replace(";", ",").split(",") if x.strip()]


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _all_positive(xs):
    return bool(xs) and all(x > 0 for x in xs)


# section -> key -> (parser, default, check, description)
SCHEMA = {
    "grid": {
        "scenario": (str, "channel", lambda s: s in ("channel", "periodic"), "channel or periodic"),
        "scale": (int, 1, _positive, "resolution multiplier (channel)"),
        "n": (int, 8, lambda n: n >= 4, "cells per side (periodic)"),
        "layers": (int, 4, _positive, "number of layers"),
        "dx": (float, 10e3, _positive, "cell size at scale 1 (m)"),
    },
    "physics": {
        "f": (float, 1.2e-4, math.isfinite, "Coriolis parameter (1/s)"),
        "g": (float, 9.81, _positive, "gravity (m/s^2)"),
        "depth": (float, 1000.0, _positive, "resting column depth H (m)"),
        "drho": (float, 2.0, _positive, "density step between layers (kg/m^3)"),
        "shear_velocity": (float, 0.05, math.isfinite, "top-layer geostrophic velocity (m/s)"),
        "amplitude": (float, 10.0, _nonneg, "interface perturbation (m)"),
        "nu_h": (float, 10.0, _nonneg, "horizontal viscosity"),
        "visc_form": (str, "laplacian", lambda s: s in ("laplacian", "biharmonic"), "laplacian|biharmonic"),
        "nu_v": (float, 1e-5, _nonneg, "vertical viscosity (m^2/s)"),
        "c_drag": (float, 1e-3, _nonneg, "quadratic bottom drag"),
        "seed": (int, 0, _nonneg, "random seed (periodic scenario)"),
    },
    "scheme": {
        "scheme": (Scheme.parse, Scheme.SSPRK2_SE, None, "ssprk2se|ssprk3se|fese|unsplit"),
        "dt": (float, 16.0, _positive, "slow step (s)"),
        "m": (int, 4, _positive, "substeps per slow step"),
        "mixing": (_bool, False, None, "implicit vertical mixing"),
        "reconcile": (_bool, True, None, "SSH reconciliation"),
        "t_end": (float, 2048.0, _positive, "run length (s)"),
        "dts": (_floats, [64.0, 32.0, 16.0, 8.0, 4.0], _all_positive, "converge: halving dt list"),
        "ref_dt": (float, 0.5, _positive, "converge: reference step (s)"),
        "dt_btrs": (_floats, [4.0, 8.0, 16.0, 32.0, 64.0, 128.0], _all_positive, "stability: dt_btr sweep"),
        "nsteps": (int, 1000, _positive, "stability: steps per probe"),
        "taylor_dts": (_floats, [4000.0, 2000.0, 1000.0, 500.0], _all_positive, "taylor: dt list"),
    },
    "output": {
        "dir": (str, "output", None, "directory for snapshots"),
        "snapshot_interval": (int, 0, _nonneg, "steps between snapshots (0 = none)"),
        "digits": (int, 16, lambda d: 1 <= d <= 16, "mantissa digits in CSV"),
        "workers": (int, 1, _positive, "parallel runs in converge"),
    },
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    source: str | None = None

    def __getitem__(self, key: str):
        sec, k = key.split(".")
        return self.values[sec][k]

    def scheme_config(self, dt: float | None = None) -> SchemeConfig:
        s = self.values["scheme"]
        return SchemeConfig(s["scheme"], dt=s["dt"] if dt is None else dt, M=s["m"],
                            mixing=s["mixing"], reconcile=s["reconcile"])

    def scenario(self) -> Scenario:
        g, p, s = self.values["grid"], self.values["physics"], self.values["scheme"]
        common = dict(depth=p["depth"], drho=p["drho"], nu_h=p["nu_h"], visc_form=p["visc_form"],
                      nu_v=p["nu_v"], c_drag=p["c_drag"], f=p["f"], g=p["g"], T=s["t_end"])
        try:
            if g["scenario"] == "channel":
                return build_channel_scenario(g["scale"], g["layers"], amplitude=p["amplitude"],
                                              U=p["shear_velocity"], dx=g["dx"], **common)
            return build_periodic_scenario(g["n"], g["layers"], dx=g["dx"], amplitude=p["amplitude"],
                                           seed=p["seed"], **common)
        except ValueError as e:
            raise ConfigError(f"invalid scenario: {e}") from e


def defaults() -> dict:
    return {sec: {k: entry[1] for k, entry in keys.items()} for sec, keys in SCHEMA.items()}


def _line_of(text: str, section: str, key: str) -> int | None:
    cur = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1].strip().lower()
        elif cur == section and "=" in s and s.split("=", 1)[0].strip().lower() == key:
            return n
    return None


def _where(section, key, text):
    line = _line_of(text, section, key) if text is not None else None
    return f"[{section}] {key}" + (f" (line {line})" if line else "")


def set_value(values: dict, section: str, key: str, raw: str, text: str | None = None) -> None:
    section, key = section.strip().lower(), key.strip().lower()
    if section not in SCHEMA:
        raise ConfigError(f"unknown section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigError(f"unknown key {key!r} in {_where(section, key, text)}")
    parse, _, check, desc = SCHEMA[section][key]
    try:
        v = parse(raw.strip())
    except ValueError as e:
        raise ConfigError(f"bad value for {key} at {_where(section, key, text)}: {e}") from e
    if check is not None and not check(v):
        raise ConfigError(f"invalid {key} = {raw.strip()} at {_where(section, key, text)}: expected {desc}"
                          + (" > 0" if check in (_positive, _all_positive) else ""))
    values[section][key] = v


def parse_config(text: str, overrides: dict | None = None, source: str | None = None,
                 command: str | None = None) -> RunConfig:
    """Parse and validate; ``command`` limits the step-size cross checks to
    the keys that command uses (all of them when None)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str.lower
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from e
    values = defaults()
    for sec in cp.sections():
        for key, raw in cp.items(sec, raw=True):
            set_value(values, sec, key, raw, text)
    for dotted, raw in (overrides or {}).items():
        if "." not in dotted:
            raise ConfigError(f"override {dotted!r} must look like section.key")
        sec, key = dotted.split(".", 1)
        set_value(values, sec, key, str(raw))
    cfg = RunConfig(values, source)
    _cross_check(cfg, text, command)
    return cfg


def load_config(path: str | Path | None, overrides: dict | None = None,
                command: str | None = None) -> RunConfig:
    if path is None:
        return parse_config("", overrides, command=command)
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(), overrides, str(p), command)


def _divides(T, dt):
    n = round(T / dt)
    return n >= 1 and math.isclose(n * dt, T, rel_tol=1e-12)


def _cross_check(cfg: RunConfig, text: str, command: str | None = None) -> None:
    s = cfg.values["scheme"]
    if command in (None, "run") and not _divides(s["t_end"], s["dt"]):
        raise ConfigError(f"dt = {s['dt']:g} does not divide t_end = {s['t_end']:g} at "
                          f"{_where('scheme', 'dt', text)}")
    if command not in (None, "converge"):
        return
    if not _divides(s["t_end"], s["ref_dt"]):
        raise ConfigError(f"ref_dt = {s['ref_dt']:g} does not divide t_end = {s['t_end']:g} at "
                          f"{_where('scheme', 'ref_dt', text)}")
    for dt in s["dts"]:
        if not _divides(s["t_end"], dt):
            raise ConfigError(f"dts entry {dt:g} does not divide t_end = {s['t_end']:g} at "
                              f"{_where('scheme', 'dts', text)}")
    for a, b in zip(s["dts"], s["dts"][1:]):
        if a != 2 * b:
            raise ConfigError(f"dts must halve strictly ({a:g} -> {b:g}) at {_where('scheme', 'dts', text)}")


def describe() -> str:
    """Documented key list, one line per key."""
    out = []
    for sec, keys in SCHEMA.items():
        out.append(f"[{sec}]")
        for k, (_, default, _, desc) in keys.items():
            d = default.value if isinstance(default, Scheme) else default
            if isinstance(d, list):
                d = ",".join(f"{x:g}" for x in d)
            out.append(f"  {k} = {d}    # {desc}")
    return "\n".join(out)
