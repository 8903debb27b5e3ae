"""Split-explicit SSPRK time steppers and the two comparison steppers.

Every stepper returns a new :class:`ModelState`; inputs are never mutated.
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .barotropic import BarotropicState, barotropic_ssprk2_substep, barotropic_ssprk3_substep, interp2, interp3
from .errors import BlowUpError, InvalidThicknessError, NonFiniteStateError
from .grid import Grid, VectorField, perp
from .modesplit import (BaroclinicStepResult, baroclinic_feuler, baroclinic_feuler_mixing,
                        column_weights, split_velocity)
from .tendencies import (LayerStack, PhysicalParams, momentum_tendency_Tu, thickness_tendency_Th,
                         vertical_diffusion_Du)


class Scheme(str, Enum):
    SSPRK2_SE = "SSPRK2-SE"
    SSPRK3_SE = "SSPRK3-SE"
    FE_SE = "FE-SE-baseline"
    UNSPLIT = "unsplit-SSPRK3-reference"

    @classmethod
    def parse(cls, name) -> "Scheme":
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("-", "").replace("_", "")
        aliases = {"ssprk2se": cls.SSPRK2_SE, "ssprk3se": cls.SSPRK3_SE,
                   "fese": cls.FE_SE, "fesebaseline": cls.FE_SE, "baseline": cls.FE_SE,
                   "unsplit": cls.UNSPLIT, "unsplitssprk3reference": cls.UNSPLIT,
                   "reference": cls.UNSPLIT}
        if key not in aliases:
            raise ValueError(f"unknown scheme {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class SchemeConfig:
    scheme: Scheme = Scheme.SSPRK2_SE
    dt: float = 1.0
    M: int = 1
    mixing: bool = False
    reconcile: bool = True

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("M must be an integer >= 1")

    @property
    def dt_btr(self) -> float:
        return self.dt / self.M


@dataclass
class ModelState:
    stack: LayerStack
    zeta: np.ndarray
    time: float
    H: np.ndarray
    grid: Grid

    def copy(self) -> "ModelState":
        return ModelState(self.stack.copy(), self.zeta.copy(), self.time, self.H, self.grid)

    def thickness_ssh(self) -> np.ndarray:
        return self.stack.h.sum(axis=0) - self.H


@dataclass
class FluxLedger:
    """Per-stage column transports and the resulting transport adjustments.

    ``F_zeta`` come from the substepping, ``F_h`` from the layer fluxes,
    ``D_e = F_zeta - F_h`` and ``u_A`` the face velocity added to every layer
    inside the thickness update.
    """

    F_zeta: list = field(default_factory=list)
    F_h: list = field(default_factory=list)
    D_e: list = field(default_factory=list)
    u_A: list = field(default_factory=list)

    def record(self, F_zeta, F_h, u_A):
        self.F_zeta.append(F_zeta)
        self.F_h.append(F_h)
        self.D_e.append(F_zeta - F_h)
        self.u_A.append(u_A)


@dataclass
class StepDiagnostics:
    """Optional per-step outputs used by the acceptance checks."""

    zeta_substep: np.ndarray | None = None
    ledger: FluxLedger = field(default_factory=FluxLedger)
    projection_residuals: list = field(default_factory=list)


@contextlib.contextmanager
def _stage(name):
    try:
        yield
    except BlowUpError as e:
        raise BlowUpError(f"{name}: {e.stage}", substep=e.substep) from e
    except (NonFiniteStateError, FloatingPointError) as e:
        raise BlowUpError(name) from e
    except InvalidThicknessError as e:
        # a layer emptied mid-step: the run has diverged
        raise BlowUpError(f"{name}: {e}") from e


def _layer_flux_sum(h, u, grid):
    hf, total = column_weights(h, grid)
    return (hf * u).sum(axis=0), total


def _adjust(F_zeta, F_h, total, factor, reconcile):
    """Transport velocity that makes the thickness flux match the substep flux."""
    if not reconcile:
        return VectorField(np.zeros_like(F_h.u), np.zeros_like(F_h.v))
    return factor * (F_zeta - F_h) / total


def _bcl(u, utilde, ubar, zeta, h, params, grid, dt, cfg, diag) -> BaroclinicStepResult:
    if cfg.mixing:
        res = baroclinic_feuler_mixing(u, utilde, ubar, zeta, h, params, grid, dt)
    else:
        res = baroclinic_feuler(u, utilde, zeta, h, params, grid, dt)
    if diag is not None:
        diag.projection_residuals.append(res.projection_residual)
    return res


def _thickness(h, transport, grid, dt):
    h1 = h + dt * thickness_tendency_Th(h, transport, grid)
    if not np.isfinite(h1).all():
        raise NonFiniteStateError("thickness")
    return h1


def _finish(state, h, u, zeta_sub, cfg, diag):
    zeta = h.sum(axis=0) - state.H
    if diag is not None:
        diag.zeta_substep = zeta_sub
    if not (np.isfinite(zeta).all() and u.isfinite()):
        raise BlowUpError("final state")
    return ModelState(LayerStack(h, u), zeta, state.time + cfg.dt, state.H, state.grid)


def _check_scheme(cfg, want):
    if cfg.scheme is not want:
        raise ValueError(f"config selects {cfg.scheme.value}, stepper is {want.value}")


def ssprk2_se_step(state: ModelState, params: PhysicalParams, cfg: SchemeConfig,
                   diag: StepDiagnostics | None = None) -> ModelState:
    _check_scheme(cfg, Scheme.SSPRK2_SE)
    grid, dt, M, rec = state.grid, cfg.dt, cfg.M, cfg.reconcile
    h0, u0, z0 = state.stack.h, state.stack.u, state.zeta
    with _stage("split"):
        sp = split_velocity(state.stack, grid)
    ledger = diag.ledger if diag is not None else FluxLedger()

    with _stage("stage 1 baroclinic"):
        b1 = _bcl(u0, sp.utilde, sp.ubar, z0, h0, params, grid, dt, cfg, diag)
    with _stage("stage 1 barotropic"):
        s1 = barotropic_ssprk2_substep(BarotropicState(sp.ubar, z0, state.H), b1.gbar, params, grid, dt, M)
    u1 = s1.ubar_final[None] + b1.utilde_new
    with _stage("stage 1 thickness"):
        Fh1, tot0 = _layer_flux_sum(h0, u0, grid)
        uA1 = _adjust(s1.accumulated_flux, Fh1, tot0, 1.0, rec)
        ledger.record(s1.accumulated_flux, Fh1, uA1)
        h1 = _thickness(h0, u0 + uA1[None], grid, dt)
        z1 = h1.sum(axis=0) - state.H
        applied1 = Fh1 + uA1 * tot0

    with _stage("stage 2 baroclinic"):
        b2 = _bcl(u1, b1.utilde_new, s1.ubar_final, z1, h1, params, grid, dt, cfg, diag)
    ut_new = 0.5 * (sp.utilde + b2.utilde_new)
    with _stage("stage 2 barotropic"):
        s2 = barotropic_ssprk2_substep(BarotropicState(sp.ubar, z0, state.H),
                                       interp2(b1.gbar, b2.gbar), params, grid, dt, M)
    u_new = s2.ubar_final[None] + ut_new
    with _stage("stage 2 thickness"):
        fs, tot1 = _layer_flux_sum(h1, u_new, grid)
        Fh2 = 0.5 * (applied1 + fs)
        uA2 = _adjust(s2.accumulated_flux, Fh2, tot1, 2.0, rec)
        ledger.record(s2.accumulated_flux, Fh2, uA2)
        h2 = _thickness(h1, u_new + uA2[None], grid, dt)
        h_new = 0.5 * (h0 + h2)
    return _finish(state, h_new, u_new, s2.zeta_final, cfg, diag)


def ssprk3_se_step(state: ModelState, params: PhysicalParams, cfg: SchemeConfig,
                   diag: StepDiagnostics | None = None) -> ModelState:
    _check_scheme(cfg, Scheme.SSPRK3_SE)
    grid, dt, M, rec = state.grid, cfg.dt, cfg.M, cfg.reconcile
    h0, u0, z0 = state.stack.h, state.stack.u, state.zeta
    with _stage("split"):
        sp = split_velocity(state.stack, grid)
    ledger = diag.ledger if diag is not None else FluxLedger()

    # stage 1: forward Euler from t_n
    with _stage("stage 1 baroclinic"):
        b1 = _bcl(u0, sp.utilde, sp.ubar, z0, h0, params, grid, dt, cfg, diag)
    with _stage("stage 1 barotropic"):
        s1 = barotropic_ssprk3_substep(BarotropicState(sp.ubar, z0, state.H), b1.gbar, params, grid, dt, M)
    u1 = s1.ubar_final[None] + b1.utilde_new
    with _stage("stage 1 thickness"):
        Fh1, tot0 = _layer_flux_sum(h0, u0, grid)
        uA1 = _adjust(s1.accumulated_flux, Fh1, tot0, 1.0, rec)
        ledger.record(s1.accumulated_flux, Fh1, uA1)
        h1 = _thickness(h0, u0 + uA1[None], grid, dt)
        z1 = h1.sum(axis=0) - state.H
        applied1 = Fh1 + uA1 * tot0

    # stage 2: forward Euler from the stage-1 state, pulled back to t_{n+1/2}
    with _stage("stage 2 baroclinic"):
        b2 = _bcl(u1, b1.utilde_new, s1.ubar_final, z1, h1, params, grid, dt, cfg, diag)
    ut_half = 0.75 * sp.utilde + 0.25 * b2.utilde_new
    with _stage("stage 2 barotropic"):
        s2 = barotropic_ssprk3_substep(BarotropicState(s1.ubar_final, z1, state.H), b2.gbar,
                                       params, grid, dt, M)
    ubar_half = 0.75 * sp.ubar + 0.25 * s2.ubar_final
    u_half = ubar_half[None] + ut_half
    with _stage("stage 2 thickness"):
        Fh2, tot1 = _layer_flux_sum(h1, u1, grid)
        uA2 = _adjust(s2.accumulated_flux, Fh2, tot1, 1.0, rec)
        ledger.record(s2.accumulated_flux, Fh2, uA2)
        h2 = _thickness(h1, u1 + uA2[None], grid, dt)
        h_half = 0.75 * h0 + 0.25 * h2
        z_half = h_half.sum(axis=0) - state.H
        applied2 = Fh2 + uA2 * tot1

    # stage 3: forward Euler from t_{n+1/2}, corrector substepping from t_n
    with _stage("stage 3 baroclinic"):
        b3 = _bcl(u_half, ut_half, ubar_half, z_half, h_half, params, grid, dt, cfg, diag)
    ut_new = (1.0 / 3.0) * sp.utilde + (2.0 / 3.0) * b3.utilde_new
    with _stage("stage 3 barotropic"):
        s3 = barotropic_ssprk3_substep(BarotropicState(sp.ubar, z0, state.H),
                                       interp3(b1.gbar, b2.gbar, b3.gbar), params, grid, dt, M)
    u_new = s3.ubar_final[None] + ut_new
    with _stage("stage 3 thickness"):
        u_mid = 0.5 * (u0 + u_new)
        fs, toth = _layer_flux_sum(h_half, u_mid, grid)
        Fh3 = (applied1 + applied2) / 6.0 + (2.0 / 3.0) * fs
        uA3 = _adjust(s3.accumulated_flux, Fh3, toth, 1.5, rec)
        ledger.record(s3.accumulated_flux, Fh3, uA3)
        h3 = _thickness(h_half, u_mid + uA3[None], grid, dt)
        h_new = (1.0 / 3.0) * h0 + (2.0 / 3.0) * h3
    return _finish(state, h_new, u_new, s3.zeta_final, cfg, diag)


def fe_se_baseline_step(state: ModelState, params: PhysicalParams, cfg: SchemeConfig,
                        diag: StepDiagnostics | None = None) -> ModelState:
    """One baroclinic stage, one frozen-forcing substepping, forward-Euler thickness."""
    _check_scheme(cfg, Scheme.FE_SE)
    grid, dt = state.grid, cfg.dt
    h0, u0, z0 = state.stack.h, state.stack.u, state.zeta
    with _stage("split"):
        sp = split_velocity(state.stack, grid)
    ledger = diag.ledger if diag is not None else FluxLedger()
    with _stage("baroclinic"):
        b1 = _bcl(u0, sp.utilde, sp.ubar, z0, h0, params, grid, dt, cfg, diag)
    with _stage("barotropic"):
        s1 = barotropic_ssprk2_substep(BarotropicState(sp.ubar, z0, state.H), b1.gbar,
                                       params, grid, dt, cfg.M)
    u_new = s1.ubar_final[None] + b1.utilde_new
    with _stage("thickness"):
        Fh1, tot0 = _layer_flux_sum(h0, u0, grid)
        uA1 = _adjust(s1.accumulated_flux, Fh1, tot0, 1.0, cfg.reconcile)
        ledger.record(s1.accumulated_flux, Fh1, uA1)
        h_new = _thickness(h0, u0 + uA1[None], grid, dt)
    return _finish(state, h_new, u_new, s1.zeta_final, cfg, diag)


def full_tendency(stack: LayerStack, params: PhysicalParams, grid: Grid):
    """Unsplit right-hand side: (du/dt, dh/dt) of the layered system."""
    du = -params.f * perp(stack.u, grid) + momentum_tendency_Tu(stack, params, grid) \
        + vertical_diffusion_Du(stack, params, grid)
    if grid.channel:
        du.v[..., 0, :] = 0.0
        du.v[..., -1, :] = 0.0
    return du, thickness_tendency_Th(stack.h, stack.u, grid)


def unsplit_reference_step(state: ModelState, params: PhysicalParams, cfg: SchemeConfig,
                           diag: StepDiagnostics | None = None) -> ModelState:
    """Classic three-stage SSPRK on the unsplit system (reference generator)."""
    _check_scheme(cfg, Scheme.UNSPLIT)
    grid, dt = state.grid, cfg.dt

    def euler(s):
        du, dh = full_tendency(s, params, grid)
        return LayerStack(s.h + dt * dh, s.u + dt * du)

    s0 = state.stack
    with _stage("unsplit stage 1"):
        s1 = euler(s0)
    with _stage("unsplit stage 2"):
        e = euler(s1)
        s2 = LayerStack(0.75 * s0.h + 0.25 * e.h, 0.75 * s0.u + 0.25 * e.u)
    with _stage("unsplit stage 3"):
        e = euler(s2)
        s3 = LayerStack(s0.h / 3.0 + (2.0 / 3.0) * e.h, s0.u / 3.0 + (2.0 / 3.0) * e.u)
    return _finish(state, s3.h, s3.u, None, cfg, diag)


STEPPERS = {
    Scheme.SSPRK2_SE: ssprk2_se_step,
    Scheme.SSPRK3_SE: ssprk3_se_step,
    Scheme.FE_SE: fe_se_baseline_step,
    Scheme.UNSPLIT: unsplit_reference_step,
}


def step(state: ModelState, params: PhysicalParams, cfg: SchemeConfig,
         diag: StepDiagnostics | None = None) -> ModelState:
    # a diverging step overflows before the finiteness checks report it
    with np.errstate(over="ignore", invalid="ignore"):
        return STEPPERS[cfg.scheme](state, params, cfg, diag)


def integrate(state: ModelState, params: PhysicalParams, cfg: SchemeConfig, nsteps: int,
              callback=None) -> ModelState:
    """Advance ``nsteps`` steps; ``callback(n, state)`` runs after each one.

    Blow-ups are re-raised with the failing step index attached.
    """
    for n in range(1, nsteps + 1):
        try:
            state = step(state, params, cfg)
        except BlowUpError as e:
            raise BlowUpError(e.stage, substep=e.substep, step=n) from e
        if callback is not None:
            callback(n, state)
    return state
