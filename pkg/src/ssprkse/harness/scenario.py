"""Initial states for the studies: a baroclinic f-plane channel and a small periodic box."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grid import Boundary, Grid, VectorField
from ..stepper import ModelState
from ..tendencies import LayerStack, PhysicalParams


@dataclass
class Scenario:
    name: str
    grid: Grid
    params: PhysicalParams
    state: ModelState
    T: float

    @property
    def nlayers(self) -> int:
        return self.params.nlayers

    @property
    def H(self) -> np.ndarray:
        return self.state.H


def _state(grid, h, u, depth):
    H = np.full(grid.cell_shape, float(depth))
    if (h <= 0).any():
        raise ValueError("initial layer thickness must be positive")
    return ModelState(LayerStack(h, u), h.sum(axis=0) - H, 0.0, H, grid)


def build_channel_scenario(scale: int = 1, L: int = 4, *, amplitude: float = 10.0,
                           U: float = 0.05, depth: float = 1000.0, drho: float = 2.0,
                           dx: float = 10e3, nu_h: float = 10.0, nu_v: float = 1e-5,
                           c_drag: float = 1e-3, f: float = 1.2e-4, g: float = 9.81,
                           visc_form: str = "laplacian", T: float = 2048.0) -> Scenario:
    """Zonal channel with sheared geostrophic flow and a perturbed interface.

    Layer velocities decrease linearly from ``U`` at the top to rest at the
    bottom.  Each interface tilts meridionally so the discrete Montgomery
    gradient balances Coriolis exactly; the free surface tilts the other way.
    A cosine of one zonal wavelength, tapered to vanish at the walls, is added
    to the interior interfaces with the given ``amplitude`` (m).
    """
    if L < 2:
        raise ValueError("the channel scenario needs at least two layers")
    if scale < 1:
        raise ValueError("scale must be >= 1")
    grid = Grid(16 * scale, 44 * scale, dx / scale, dx / scale, Boundary.CHANNEL)
    rho = tuple(1000.0 + drho * k for k in range(L))
    params = PhysicalParams(f=f, g=g, rho0=1000.0, rho=rho, nu_h=nu_h, visc_form=visc_form,
                            nu_v=nu_v, c_drag=c_drag)
    f, g, rho0 = params.f, params.g, params.rho0

    uk = np.array([U * (L - 1 - k) / (L - 1) for k in range(L)])
    Lx, Ly = grid.nx * grid.dx, grid.ny * grid.dy
    x, y = grid.x_centers(), grid.y_centers() - 0.5 * Ly
    Y, X = np.meshgrid(y, x, indexing="ij")
    bump = np.cos(2 * np.pi * X / Lx) * np.sin(np.pi * (Y + 0.5 * Ly) / Ly)

    # interface heights z_0 (surface) ... z_L = 0 (flat bottom)
    z = np.empty((L + 1,) + grid.cell_shape)
    z[0] = depth - f * rho0 * uk[0] / (rho[0] * g) * Y
    for i in range(1, L):
        slope = f * rho0 * (uk[i - 1] - uk[i]) / ((rho[i] - rho[i - 1]) * g)
        z[i] = depth * (L - i) / L + slope * Y + amplitude * bump
    z[L] = 0.0
    tilt = max(float(np.ptp(z[i])) for i in range(1, L)) if L > 1 else 0.0
    h = z[:-1] - z[1:]
    if not tilt < h.min():
        raise ValueError("interface tilt exceeds the thinnest layer")

    u = grid.zeros_vector(L)
    u.u[:] = uk[:, None, None]
    return Scenario("channel", grid, params, _state(grid, h, u, depth), T)


def build_periodic_scenario(n: int = 8, L: int = 2, *, depth: float = 100.0, dx: float = 5e3,
                            amplitude: float = 0.5, velocity: float = 0.1, seed: int = 0,
                            drho: float = 2.0, nu_h: float = 0.0, visc_form: str = "laplacian",
                            nu_v: float = 0.0, c_drag: float = 0.0, f: float = 1.2e-4,
                            g: float = 9.81, T: float = 600.0) -> Scenario:
    """Doubly periodic box with a few random smooth Fourier modes per field."""
    grid = Grid(n, n, dx, dx, Boundary.PERIODIC)
    rng = np.random.default_rng(seed)
    rho = tuple(1000.0 + drho * k for k in range(L))
    params = PhysicalParams(f=f, g=g, rho=rho, nu_h=nu_h, visc_form=visc_form, nu_v=nu_v,
                            c_drag=c_drag)
    kx = 2 * np.pi / (n * dx)

    def smooth(xo, yo):
        X, Y = np.meshgrid(np.arange(n) * dx + xo, np.arange(n) * dx + yo)
        a, b, c, d = rng.uniform(-1, 1, 4)
        return (a * np.cos(kx * X) + b * np.sin(kx * Y)
                + c * np.cos(kx * (X + Y)) + d * np.sin(2 * kx * X)) / 4

    h = np.stack([np.full(grid.cell_shape, depth / L) + amplitude * smooth(0.5 * dx, 0.5 * dx)
                  for _ in range(L)])
    u = VectorField(np.stack([velocity * smooth(0, 0.5 * dx) for _ in range(L)]),
                    np.stack([velocity * smooth(0.5 * dx, 0) for _ in range(L)]))
    return Scenario("periodic", grid, params, _state(grid, h, u, depth), T)


def rest_state(grid: Grid, L: int, depth: float = 1000.0) -> ModelState:
    h = np.full((L,) + grid.cell_shape, depth / L)
    return _state(grid, h, grid.zeros_vector(L), depth)


SCENARIOS = {"channel": build_channel_scenario, "periodic": build_periodic_scenario}
