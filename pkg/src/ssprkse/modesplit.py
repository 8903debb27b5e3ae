"""Barotropic/baroclinic velocity splitting and the forward-Euler baroclinic stage."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BlowUpError, InvalidThicknessError
from .grid import Grid, VectorField, face_average, gradient, perp
from .tendencies import (LayerStack, PhysicalParams, momentum_tendency_Tu,
                         speed_on_faces, vertical_diffusion_Du)


@dataclass
class SplitVelocities:
    ubar: VectorField
    utilde: VectorField


@dataclass
class BaroclinicStepResult:
    utilde_new: VectorField
    gbar: VectorField
    # weighted column sum of utilde after projection, see projection_residual
    projection_residual: float = 0.0


def column_weights(h: np.ndarray, grid: Grid) -> tuple[VectorField, VectorField]:
    """Face thickness per layer and its column sum."""
    if (h <= 0).any():
        raise InvalidThicknessError("layer thickness must be positive")
    hf = face_average(h, grid)
    return hf, hf.sum(axis=0)


def thickness_weighted_mean(F: VectorField, hf: VectorField, total: VectorField) -> VectorField:
    return VectorField((hf.u * F.u).sum(axis=0) / total.u, (hf.v * F.v).sum(axis=0) / total.v)


def split_velocity(stack: LayerStack, grid: Grid) -> SplitVelocities:
    """ubar = sum h_k u_k / sum h_k on each face, utilde_k = u_k - ubar."""
    hf, total = column_weights(stack.h, grid)
    ubar = thickness_weighted_mean(stack.u, hf, total)
    return SplitVelocities(ubar, stack.u - ubar[None])


def projection_residual(utilde: VectorField, hf: VectorField) -> float:
    """max_faces |sum_k h_k utilde_k| / max_faces sum_k h_k |utilde_k|.

    Normalising by the field-wide scale rather than face by face keeps the
    measure meaningful where utilde itself is at round-off level.
    """
    num = max(float(np.abs((hf.u * utilde.u).sum(axis=0)).max()),
              float(np.abs((hf.v * utilde.v).sum(axis=0)).max()))
    den = max(float((hf.u * np.abs(utilde.u)).sum(axis=0).max()),
              float((hf.v * np.abs(utilde.v)).sum(axis=0).max()))
    return num / den if den > 0 else 0.0


def _provisional(u, utilde, zeta, h, params, grid, dt, explicit_diffusion):
    stack = LayerStack(h, u)
    rate = -params.f * perp(utilde, grid) + momentum_tendency_Tu(stack, params, grid) \
        + (params.g * gradient(zeta, grid))[None]
    if explicit_diffusion:
        rate = rate + vertical_diffusion_Du(stack, params, grid)
    if grid.channel:
        rate.v[..., 0, :] = 0.0
        rate.v[..., -1, :] = 0.0
    return utilde + dt * rate


def _project(prov: VectorField, h: np.ndarray, grid: Grid, dt: float):
    hf, total = column_weights(h, grid)
    gbar = thickness_weighted_mean(prov, hf, total) / dt
    return prov - (dt * gbar)[None], gbar, hf


def baroclinic_feuler(u: VectorField, utilde: VectorField, zeta: np.ndarray, h: np.ndarray,
                      params: PhysicalParams, grid: Grid, dt: float) -> BaroclinicStepResult:
    """Forward-Euler baroclinic stage; the barotropic forcing falls out of the
    thickness-weighted projection of the provisional velocity."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    prov = _provisional(u, utilde, zeta, h, params, grid, dt, explicit_diffusion=True)
    ut1, gbar, hf = _project(prov, h, grid, dt)
    if not (ut1.isfinite() and gbar.isfinite()):
        raise BlowUpError("baroclinic forward-Euler")
    return BaroclinicStepResult(ut1, gbar, projection_residual(ut1, hf))


def implicit_vertical_diffusion(rhs: VectorField, h: np.ndarray, drag_speed: VectorField,
                                params: PhysicalParams, grid: Grid, dt: float) -> VectorField:
    """Solve ``u - dt D(u) = rhs`` column by column.

    Bottom drag is linearised with a frozen speed (``drag_speed`` = |u_L| from
    the old level), which keeps every column tridiagonal.
    """
    hf = face_average(h, grid)
    out = []
    for comp in ("u", "v"):
        r = getattr(rhs, comp)
        hk = getattr(hf, comp)
        L = hk.shape[0]
        lower = np.zeros_like(r)
        upper = np.zeros_like(r)
        diag = np.ones_like(r)
        if L > 1:
            coup = dt * params.nu_v / (0.5 * (hk[:-1] + hk[1:]))
            upper[:-1] = -coup / hk[:-1]
            lower[1:] = -coup / hk[1:]
            diag[:-1] += coup / hk[:-1]
            diag[1:] += coup / hk[1:]
        diag[-1] += dt * params.c_drag * getattr(drag_speed, comp) / hk[-1]
        out.append(kernels.tridiag_batched(lower, diag, upper, r))
    return VectorField(*out)


def baroclinic_feuler_mixing(u: VectorField, utilde: VectorField, ubar: VectorField,
                             zeta: np.ndarray, h: np.ndarray, params: PhysicalParams,
                             grid: Grid, dt: float) -> BaroclinicStepResult:
    """As :func:`baroclinic_feuler`, with the vertical diffusion applied
    implicitly to the full velocity after the projection.

    The same ``ubar`` is added before the column solve and removed after it.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    prov = _provisional(u, utilde, zeta, h, params, grid, dt, explicit_diffusion=False)
    ut1, gbar, hf = _project(prov, h, grid, dt)
    if params.nu_v > 0 or params.c_drag > 0:
        speed = speed_on_faces(u[-1], grid)
        u1 = implicit_vertical_diffusion(ut1 + ubar[None], h, speed, params, grid, dt)
        ut1 = u1 - ubar[None]
    if not (ut1.isfinite() and gbar.isfinite()):
        raise BlowUpError("baroclinic forward-Euler with vertical mixing")
    return BaroclinicStepResult(ut1, gbar, projection_residual(ut1, hf))


def tridiag_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Solve one (or a batch of) tridiagonal systems; axis 0 is the layer index."""
    lower, diag, upper, rhs = (np.asarray(a, dtype=float) for a in (lower, diag, upper, rhs))
    if diag.ndim == 0 or diag.shape[0] < 1:
        raise ValueError("need at least one row")
    return kernels.tridiag_batched(lower, diag, upper, rhs)
