"""Empirical stability envelope: does a run stay bounded for N steps?"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import BlowUpError
from ..stepper import Scheme, SchemeConfig, step
from .scenario import Scenario


@dataclass
class StabilityRow:
    scheme: str
    dt_btr: float
    dt: float
    M: int
    bounded: bool
    growth: float
    steps: int
    status: str

    FIELDS = ("scheme", "dt_btr", "dt", "M", "bounded", "growth", "steps", "status")


def probe_one(scenario: Scenario, cfg: SchemeConfig, nsteps: int, limit: float = 100.0) -> StabilityRow:
    """Run up to ``nsteps``; unbounded once max|u| exceeds ``limit`` times its start value."""
    state, params = scenario.state, scenario.params
    u0 = state.stack.u.max_abs()
    if u0 == 0:
        raise ValueError("stability probe needs a non-zero initial velocity")
    growth, n = 1.0, 0
    try:
        for n in range(1, nsteps + 1):
            state = step(state, params, cfg)
            growth = state.stack.u.max_abs() / u0
            if not growth < limit:
                break
    except BlowUpError:
        growth = math.inf
    bounded = growth < limit
    return StabilityRow(cfg.scheme.value, cfg.dt_btr, cfg.dt, cfg.M, bounded, growth, n,
                        "ok" if bounded else "N/A")


def run_stability_probe(scenario: Scenario, scheme, dt_btrs, M: int, nsteps: int = 1000,
                        limit: float = 100.0, reconcile: bool = True) -> list[StabilityRow]:
    rows = []
    for b in sorted(float(x) for x in dt_btrs):
        cfg = SchemeConfig(scheme, dt=b * M, M=M, reconcile=reconcile)
        rows.append(probe_one(scenario, cfg, nsteps, limit))
    return rows


def largest_stable(rows: list[StabilityRow]) -> float:
    """Largest dt_btr such that it and every smaller probed value stayed bounded (0 if none)."""
    best = 0.0
    for r in sorted(rows, key=lambda r: r.dt_btr):
        if not r.bounded:
            break
        best = r.dt_btr
    return best


__all__ = ["StabilityRow", "probe_one", "run_stability_probe", "largest_stable", "Scheme"]
