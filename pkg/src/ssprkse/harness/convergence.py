"""Temporal convergence studies against a fine-step unsplit reference."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..errors import BlowUpError, ConfigError
from ..stepper import ModelState, Scheme, SchemeConfig, integrate
from .metrics import relative_l2, top_layer_errors
from .scenario import Scenario


@dataclass
class ConvergenceRow:
    dt: float
    dt_btr: float
    M: int
    err_u: float
    rate_u: float
    err_h: float
    rate_h: float
    status: str = "ok"

    FIELDS = ("dt", "dt_btr", "M", "err_u", "rate_u", "err_h", "rate_h", "status")


@dataclass
class Reference:
    state: ModelState
    dt: float
    # relative top-layer velocity difference between dt and dt/2 references
    self_error: float | None = None


def nsteps_for(T: float, dt: float) -> int:
    n = round(T / dt)
    if n < 1 or not math.isclose(n * dt, T, rel_tol=1e-12, abs_tol=0.0):
        raise ConfigError(f"dt={dt:g} does not divide the run length T={T:g}")
    return n


def check_halving(dts) -> None:
    dts = [float(d) for d in dts]
    if not dts:
        raise ConfigError("empty dt list")
    if any(d <= 0 for d in dts):
        raise ConfigError("dt values must be positive")
    for a, b in zip(dts, dts[1:]):
        if a != 2.0 * b:
            raise ConfigError(f"dt list must halve strictly: {a:g} -> {b:g}")


def run_scheme(scenario: Scenario, cfg: SchemeConfig) -> ModelState:
    return integrate(scenario.state, scenario.params, cfg, nsteps_for(scenario.T, cfg.dt))


def make_reference(scenario: Scenario, dt: float, self_check: bool = True) -> Reference:
    """Unsplit SSPRK3 solution at ``dt``; optionally also at ``dt/2`` for its self-error."""
    try:
        ref = run_scheme(scenario, SchemeConfig(Scheme.UNSPLIT, dt=dt))
        err = None
        if self_check:
            half = run_scheme(scenario, SchemeConfig(Scheme.UNSPLIT, dt=dt / 2))
            err = relative_l2(ref.stack.u[0], half.stack.u[0])
    except BlowUpError as e:
        raise ConfigError(f"reference run blew up: {e}") from e
    return Reference(ref, dt, err)


def _one(args):
    scenario, cfg, ref_state = args
    try:
        return top_layer_errors(run_scheme(scenario, cfg), ref_state)
    except BlowUpError:
        return None


def _rate(coarse, fine):
    if coarse is None or fine is None or fine <= 0 or coarse <= 0:
        return math.nan
    return math.log2(coarse / fine)


def run_convergence_study(scenario: Scenario, scheme, dts, M: int = 1, reference: Reference | float = 0.5,
                          reconcile: bool = True, mixing: bool = False,
                          workers: int = 1) -> list[ConvergenceRow]:
    """One row per ``dt``; diverged runs are kept as ``N/A`` rows.

    ``reference`` is either a prepared :class:`Reference` (so several studies
    can share one) or the reference step size.  Rates are computed only
    between adjacent ``ok`` rows.
    """
    check_halving(dts)
    for dt in dts:
        nsteps_for(scenario.T, dt)
    if not isinstance(reference, Reference):
        reference = make_reference(scenario, float(reference))
    cfgs = [SchemeConfig(scheme, dt=float(dt), M=M, reconcile=reconcile, mixing=mixing) for dt in dts]
    jobs = [(scenario, c, reference.state) for c in cfgs]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_one, jobs))
    else:
        results = [_one(j) for j in jobs]

    rows, prev = [], None
    for cfg, res in zip(cfgs, results):
        if res is None:
            rows.append(ConvergenceRow(cfg.dt, cfg.dt_btr, M, math.nan, math.nan, math.nan, math.nan, "N/A"))
            prev = None
            continue
        eu, eh = res
        ru = _rate(prev[0], eu) if prev else math.nan
        rh = _rate(prev[1], eh) if prev else math.nan
        rows.append(ConvergenceRow(cfg.dt, cfg.dt_btr, M, eu, ru, eh, rh))
        prev = res
    return rows


def final_rates(rows: list[ConvergenceRow]) -> tuple[float, float]:
    last = rows[-1]
    return last.rate_u, last.rate_h
