"""Fast-mode substepping with frozen barotropic forcing and flux bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BlowUpError
from .grid import Grid, VectorField, _check_cell, _check_vector, divergence, face_average, gradient, perp
from .tendencies import PhysicalParams


@dataclass
class BarotropicState:
    ubar: VectorField
    zeta: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        if ((self.zeta + self.H) <= 0).any():
            raise ValueError("total column depth zeta + H must be positive")


@dataclass
class SubstepResult:
    ubar_final: VectorField
    zeta_final: np.ndarray
    # time-averaged barotropic transport over the run, (m^2/s)
    accumulated_flux: VectorField


def barotropic_rhs(state: BarotropicState, gbar: VectorField, params: PhysicalParams,
                   grid: Grid) -> tuple[VectorField, np.ndarray]:
    du = gbar - (params.f * perp(state.ubar, grid) + params.g * gradient(state.zeta, grid))
    if grid.channel:
        du.v[0, :] = 0.0
        du.v[-1, :] = 0.0
    dzeta = -divergence(state.ubar * face_average(state.zeta + state.H, grid), grid)
    if not (du.isfinite() and np.isfinite(dzeta).all()):
        raise BlowUpError("barotropic right-hand side")
    return du, dzeta


def _run(order, state, gbar, params, grid, dt, M, backend):
    if M < 1:
        raise ValueError("substep count M must be >= 1")
    if dt <= 0:
        raise ValueError("dt must be positive")
    _check_vector(state.ubar, grid)
    _check_vector(gbar, grid)
    _check_cell(state.zeta, grid)
    u, z, acc = kernels.substep(order, grid, state.ubar, state.zeta, state.H, gbar,
                                params.f, params.g, dt, M, backend=backend)
    return SubstepResult(u, z, acc)


def barotropic_ssprk2_substep(state: BarotropicState, gbar: VectorField, params: PhysicalParams,
                              grid: Grid, dt: float, M: int, backend: str | None = None) -> SubstepResult:
    """``M`` two-stage SSPRK substeps of size ``dt/M`` with ``gbar`` held fixed.

    ``accumulated_flux`` is the substep average of the stage transports, so
    ``zeta_final = zeta - dt * div(accumulated_flux)``.
    """
    return _run(2, state, gbar, params, grid, dt, M, backend)


def barotropic_ssprk3_substep(state: BarotropicState, gbar: VectorField, params: PhysicalParams,
                              grid: Grid, dt: float, M: int, backend: str | None = None) -> SubstepResult:
    """Three-stage SSPRK counterpart of :func:`barotropic_ssprk2_substep`;
    stage transports are weighted 1/6, 1/6, 2/3."""
    return _run(3, state, gbar, params, grid, dt, M, backend)


def interp2(g0: VectorField, g1: VectorField) -> VectorField:
    return 0.5 * g0 + 0.5 * g1


def interp3(g0: VectorField, g1: VectorField, g_half: VectorField) -> VectorField:
    return (1.0 / 6.0) * g0 + (1.0 / 6.0) * g1 + (2.0 / 3.0) * g_half
