"""Staggered (Arakawa C) grid, field containers and discrete operators.

Layout conventions
------------------
Cell fields have shape ``(..., ny, nx)``; leading axes (typically the layer
index) broadcast through every operator.

``u[..., j, i]`` sits on the west face of cell ``(j, i)``, i.e. between cells
``(j, i-1)`` and ``(j, i)``.  ``v[..., j, i]`` sits on the south face of cell
``(j, i)``.  The x direction is always periodic.  In the ``channel`` mode the y
direction is bounded by free-slip walls: ``v`` then carries ``ny + 1`` rows and
rows ``0`` and ``ny`` are the wall faces, held at zero.

Relative vorticity lives on cell corners; corner ``(j, i)`` is the south-west
corner of cell ``(j, i)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class DimensionError(ValueError):
    """Field shape does not match the grid."""


class Boundary(str, Enum):
    PERIODIC = "doubly-periodic"
    CHANNEL = "zonal-channel"


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    dx: float
    dy: float
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid needs nx, ny >= 4, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("dx and dy must be positive")
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def channel(self) -> bool:
        return self.boundary is Boundary.CHANNEL

    @property
    def cell_shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def u_shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def v_shape(self) -> tuple[int, int]:
        return (self.ny + 1, self.nx) if self.channel else (self.ny, self.nx)

    @property
    def corner_shape(self) -> tuple[int, int]:
        return self.v_shape

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    def x_faces(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    def y_faces(self) -> np.ndarray:
        return np.arange(self.v_shape[0]) * self.dy

    def zeros_cell(self, *lead: int) -> np.ndarray:
        return np.zeros(lead + self.cell_shape)

    def zeros_vector(self, *lead: int) -> "VectorField":
        return VectorField(np.zeros(lead + self.u_shape), np.zeros(lead + self.v_shape))

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.nx * factor, self.ny * factor, self.dx / factor,
                    self.dy / factor, self.boundary)


@dataclass
class VectorField:
    """Normal velocity components on x-faces (``u``) and y-faces (``v``)."""

    u: np.ndarray
    v: np.ndarray

    def __add__(self, other):
        if isinstance(other, VectorField):
            return VectorField(self.u + other.u, self.v + other.v)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, VectorField):
            return VectorField(self.u - other.u, self.v - other.v)
        return NotImplemented

    def __neg__(self):
        return VectorField(-self.u, -self.v)

    def __mul__(self, a):
        if isinstance(a, VectorField):
            return VectorField(self.u * a.u, self.v * a.v)
        return VectorField(self.u * a, self.v * a)

    __rmul__ = __mul__

    def __truediv__(self, a):
        if isinstance(a, VectorField):
            return VectorField(self.u / a.u, self.v / a.v)
        return VectorField(self.u / a, self.v / a)

    def __getitem__(self, k):
        return VectorField(self.u[k], self.v[k])

    def copy(self) -> "VectorField":
        return VectorField(self.u.copy(), self.v.copy())

    def sum(self, axis=0) -> "VectorField":
        return VectorField(self.u.sum(axis=axis), self.v.sum(axis=axis))

    def isfinite(self) -> bool:
        return bool(np.isfinite(self.u).all() and np.isfinite(self.v).all())

    def max_abs(self) -> float:
        return float(max(np.abs(self.u).max(initial=0.0), np.abs(self.v).max(initial=0.0)))

    @staticmethod
    def stack(fields) -> "VectorField":
        fields = list(fields)
        return VectorField(np.stack([f.u for f in fields]), np.stack([f.v for f in fields]))


def _check_cell(s: np.ndarray, grid: Grid) -> None:
    if s.shape[-2:] != grid.cell_shape:
        raise DimensionError(f"cell field shape {s.shape[-2:]} != {grid.cell_shape}")


def _check_vector(F: VectorField, grid: Grid) -> None:
    if F.u.shape[-2:] != grid.u_shape or F.v.shape[-2:] != grid.v_shape:
        raise DimensionError(
            f"vector field shapes u{F.u.shape[-2:]}, v{F.v.shape[-2:]} do not match "
            f"grid u{grid.u_shape}, v{grid.v_shape}")


def _wall_zero(v: np.ndarray, grid: Grid) -> np.ndarray:
    if grid.channel:
        v[..., 0, :] = 0.0
        v[..., -1, :] = 0.0
    return v


def face_average(s: np.ndarray, grid: Grid) -> VectorField:
    """Two-point centred average of a cell field onto the faces.

    Channel wall faces take the adjacent cell value; the normal velocity is
    zero there, so the value never enters a flux.
    """
    _check_cell(s, grid)
    fu = 0.5 * (s + np.roll(s, 1, axis=-1))
    if grid.channel:
        fv = np.empty(s.shape[:-2] + grid.v_shape)
        fv[..., 1:-1, :] = 0.5 * (s[..., 1:, :] + s[..., :-1, :])
        fv[..., 0, :] = s[..., 0, :]
        fv[..., -1, :] = s[..., -1, :]
    else:
        fv = 0.5 * (s + np.roll(s, 1, axis=-2))
    return VectorField(fu, fv)


def gradient(s: np.ndarray, grid: Grid) -> VectorField:
    _check_cell(s, grid)
    gx = (s - np.roll(s, 1, axis=-1)) / grid.dx
    if grid.channel:
        gy = np.zeros(s.shape[:-2] + grid.v_shape)
        gy[..., 1:-1, :] = (s[..., 1:, :] - s[..., :-1, :]) / grid.dy
    else:
        gy = (s - np.roll(s, 1, axis=-2)) / grid.dy
    return VectorField(gx, gy)


def divergence(F: VectorField, grid: Grid) -> np.ndarray:
    _check_vector(F, grid)
    du = (np.roll(F.u, -1, axis=-1) - F.u) / grid.dx
    if grid.channel:
        v = F.v.copy()
        _wall_zero(v, grid)
        dv = (v[..., 1:, :] - v[..., :-1, :]) / grid.dy
    else:
        dv = (np.roll(F.v, -1, axis=-2) - F.v) / grid.dy
    return du + dv


def v_on_u(F: VectorField, grid: Grid) -> np.ndarray:
    """Four-point average of ``v`` onto the x-faces."""
    v = F.v
    if grid.channel:
        s = v[..., :-1, :] + v[..., 1:, :]
    else:
        s = v + np.roll(v, -1, axis=-2)
    return 0.25 * (s + np.roll(s, 1, axis=-1))


def u_on_v(F: VectorField, grid: Grid) -> np.ndarray:
    """Four-point average of ``u`` onto the y-faces (zero on channel walls)."""
    u = F.u
    t = u + np.roll(u, -1, axis=-1)
    if grid.channel:
        out = np.zeros(u.shape[:-2] + grid.v_shape)
        out[..., 1:-1, :] = 0.25 * (t[..., :-1, :] + t[..., 1:, :])
        return out
    return 0.25 * (t + np.roll(t, 1, axis=-2))


def perp(F: VectorField, grid: Grid) -> VectorField:
    """k x F: returns (-v, u) with the tangential components reconstructed by
    four-point averaging.  The averaging weights are symmetric, so the
    operator is skew and does no work."""
    _check_vector(F, grid)
    return VectorField(-v_on_u(F, grid), u_on_v(F, grid))


def vorticity(F: VectorField, grid: Grid) -> np.ndarray:
    """Relative vorticity dv/dx - du/dy on cell corners (zero on free-slip walls)."""
    _check_vector(F, grid)
    dvdx = (F.v - np.roll(F.v, 1, axis=-1)) / grid.dx
    if grid.channel:
        w = np.zeros(F.u.shape[:-2] + grid.corner_shape)
        w[..., 1:-1, :] = dvdx[..., 1:-1, :] - (F.u[..., 1:, :] - F.u[..., :-1, :]) / grid.dy
        return w
    return dvdx - (F.u - np.roll(F.u, 1, axis=-2)) / grid.dy


def kinetic_energy(F: VectorField, grid: Grid) -> np.ndarray:
    _check_vector(F, grid)
    u2 = F.u * F.u
    v2 = F.v * F.v
    ku = 0.5 * (u2 + np.roll(u2, -1, axis=-1))
    if grid.channel:
        kv = 0.5 * (v2[..., :-1, :] + v2[..., 1:, :])
    else:
        kv = 0.5 * (v2 + np.roll(v2, -1, axis=-2))
    return 0.5 * (ku + kv)


def vorticity_and_ke(F: VectorField, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    return vorticity(F, grid), kinetic_energy(F, grid)


def corner_to_faces(w: np.ndarray, grid: Grid) -> VectorField:
    """Average a corner field onto faces (two corners per face)."""
    if grid.channel:
        wu = 0.5 * (w[..., :-1, :] + w[..., 1:, :])
    else:
        wu = 0.5 * (w + np.roll(w, -1, axis=-2))
    wv = 0.5 * (w + np.roll(w, -1, axis=-1))
    return VectorField(wu, wv)


def _lap_x(a: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(a, -1, axis=-1) - 2.0 * a + np.roll(a, 1, axis=-1)) / (dx * dx)


def laplacian(F: VectorField, grid: Grid) -> VectorField:
    """Component-wise five-point Laplacian.

    Channel walls are free-slip: ``u`` uses a mirror ghost row (no tangential
    stress), ``v`` is pinned to zero on the wall rows.
    """
    _check_vector(F, grid)
    dy2 = grid.dy * grid.dy
    lu = _lap_x(F.u, grid.dx)
    lv = _lap_x(F.v, grid.dx)
    if grid.channel:
        u = F.u
        up = np.concatenate([u[..., :1, :], u, u[..., -1:, :]], axis=-2)
        lu = lu + (up[..., 2:, :] - 2.0 * u + up[..., :-2, :]) / dy2
        v = F.v
        lv[..., 1:-1, :] += (v[..., 2:, :] - 2.0 * v[..., 1:-1, :] + v[..., :-2, :]) / dy2
        _wall_zero(lv, grid)
    else:
        lu = lu + (np.roll(F.u, -1, axis=-2) - 2.0 * F.u + np.roll(F.u, 1, axis=-2)) / dy2
        lv = lv + (np.roll(F.v, -1, axis=-2) - 2.0 * F.v + np.roll(F.v, 1, axis=-2)) / dy2
    return VectorField(lu, lv)


def biharmonic(F: VectorField, grid: Grid) -> VectorField:
    return laplacian(laplacian(F, grid), grid)


def area_sum(s: np.ndarray, grid: Grid) -> np.ndarray:
    """Area integral over the horizontal axes, fixed row-major summation order."""
    flat = np.ascontiguousarray(s).reshape(s.shape[:-2] + (-1,))
    return np.add.reduce(flat, axis=-1) * grid.cell_area
