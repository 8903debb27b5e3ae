"""Right-hand sides of the layered (isopycnal) thickness and momentum equations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidThicknessError, NonFiniteStateError
from .grid import (Grid, VectorField, biharmonic, corner_to_faces, divergence,
                   face_average, gradient, kinetic_energy, laplacian, u_on_v,
                   v_on_u, vorticity)


@dataclass
class PhysicalParams:
    f: float = 1.2e-4
    g: float = 9.81
    rho0: float = 1000.0
    rho: tuple = (1000.0,)
    nu_h: float = 0.0
    visc_form: str = "laplacian"
    nu_v: float = 0.0
    c_drag: float = 0.0
    p_s: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.rho = tuple(float(r) for r in self.rho)
        if self.g <= 0 or self.rho0 <= 0:
            raise ValueError("g and rho0 must be positive")
        if any(b <= a for a, b in zip(self.rho, self.rho[1:])):
            raise ValueError("layer densities must increase strictly downward")
        if self.nu_h < 0 or self.nu_v < 0 or self.c_drag < 0:
            raise ValueError("nu_h, nu_v and c_drag must be non-negative")
        if self.visc_form not in ("laplacian", "biharmonic"):
            raise ValueError(f"unknown visc_form {self.visc_form!r}")

    @property
    def nlayers(self) -> int:
        return len(self.rho)


@dataclass
class LayerStack:
    """Per-layer thickness ``h`` (L, ny, nx) and velocity ``u`` (stacked faces)."""

    h: np.ndarray
    u: VectorField

    @property
    def nlayers(self) -> int:
        return self.h.shape[0]

    def copy(self) -> "LayerStack":
        return LayerStack(self.h.copy(), self.u.copy())


def _require_finite(*arrays):
    for a in arrays:
        if isinstance(a, VectorField):
            if not a.isfinite():
                raise NonFiniteStateError("non-finite velocity")
        elif not np.isfinite(a).all():
            raise NonFiniteStateError("non-finite field")


def hydrostatic_pressure(h: np.ndarray, params: PhysicalParams) -> np.ndarray:
    """Mid-layer pressure ``p_k = p_s + sum_{l<k} rho_l g h_l + rho_k g h_k / 2``."""
    rho = np.asarray(params.rho)[:, None, None]
    if rho.shape[0] != h.shape[0]:
        raise ValueError(f"{rho.shape[0]} densities for {h.shape[0]} layers")
    w = rho * params.g * h
    above = np.cumsum(w, axis=0) - w
    p = above + 0.5 * w
    if params.p_s is not None:
        p = p + params.p_s
    return p


def montgomery_potential(h: np.ndarray, params: PhysicalParams) -> np.ndarray:
    """``p_k + rho_k g z_k`` with ``z_k`` the mid-layer height above a flat bottom.

    Its gradient is the along-layer pressure gradient force; the geopotential
    part cancels the hydrostatic slope of the layer, so a single layer feels
    ``(rho_1/rho0) g grad(h)``.
    """
    rho = np.asarray(params.rho)[:, None, None]
    below = np.cumsum(h[::-1], axis=0)[::-1] - h
    z_mid = below + 0.5 * h
    return hydrostatic_pressure(h, params) + rho * params.g * z_mid


def momentum_tendency_Tu(stack: LayerStack, params: PhysicalParams, grid: Grid) -> VectorField:
    """-grad(KE) - zeta_rel u_perp - grad(M)/rho0 + horizontal dissipation.

    Planetary Coriolis is not included; the split system applies it to the
    barotropic and baroclinic parts separately.
    """
    u, h = stack.u, stack.h
    _require_finite(h, u)
    ke = kinetic_energy(u, grid)
    wf = corner_to_faces(vorticity(u, grid), grid)
    out = -gradient(ke + montgomery_potential(h, params) / params.rho0, grid)
    out.u += wf.u * v_on_u(u, grid)
    out.v -= wf.v * u_on_v(u, grid)
    if params.nu_h > 0:
        if params.visc_form == "laplacian":
            out = out + params.nu_h * laplacian(u, grid)
        else:
            out = out - params.nu_h * biharmonic(u, grid)
    if grid.channel:
        out.v[..., 0, :] = 0.0
        out.v[..., -1, :] = 0.0
    return out


def speed_on_faces(u: VectorField, grid: Grid) -> VectorField:
    """|u| reconstructed on each face from the normal and averaged tangential parts."""
    return VectorField(np.hypot(u.u, v_on_u(u, grid)), np.hypot(u.v, u_on_v(u, grid)))


def _face_thickness(h: np.ndarray, grid: Grid) -> VectorField:
    if (h <= 0).any():
        raise InvalidThicknessError("layer thickness must be positive")
    return face_average(h, grid)


def _column_diffusion(u: np.ndarray, hf: np.ndarray, nu_v: float, drag: np.ndarray) -> np.ndarray:
    """Explicit layer-staggered second difference for one face component.

    ``u``, ``hf`` are (L, ...); ``drag`` is ``c_drag |u_L|`` on the faces.
    """
    L = u.shape[0]
    stress = np.zeros((L + 1,) + u.shape[1:])
    if L > 1:
        hbar = 0.5 * (hf[:-1] + hf[1:])
        stress[1:L] = nu_v * (u[:-1] - u[1:]) / hbar
    stress[L] = drag * u[-1]
    return (stress[:-1] - stress[1:]) / hf


def vertical_diffusion_Du(stack: LayerStack, params: PhysicalParams, grid: Grid) -> VectorField:
    """Vertical viscosity with zero surface stress and quadratic bottom drag."""
    _require_finite(stack.h, stack.u)
    hf = _face_thickness(stack.h, grid)
    if params.c_drag > 0:
        sp = speed_on_faces(stack.u[-1], grid)
        drag = VectorField(params.c_drag * sp.u, params.c_drag * sp.v)
    else:
        drag = VectorField(np.zeros(grid.u_shape), np.zeros(grid.v_shape))
    return VectorField(_column_diffusion(stack.u.u, hf.u, params.nu_v, drag.u),
                       _column_diffusion(stack.u.v, hf.v, params.nu_v, drag.v))


def thickness_flux(h: np.ndarray, transport: VectorField, grid: Grid) -> VectorField:
    return face_average(h, grid) * transport


def thickness_tendency_Th(h: np.ndarray, transport: VectorField, grid: Grid) -> np.ndarray:
    """-div(h_face * transport) per layer (isopycnal: no vertical transport)."""
    _require_finite(h, transport)
    return -divergence(thickness_flux(h, transport, grid), grid)
