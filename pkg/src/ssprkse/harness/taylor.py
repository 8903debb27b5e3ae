"""Taylor-expansion check of SSPRK2 substepping with frozen forcing.

For a spatially uniform barotropic state the substep map reduces to a 2x2
linear system ``du/dt = -f k x u - g a + G`` where ``a`` is a uniform SSH
gradient.  With

    F = f k x u + g a - G,   E = f k x F,   grad P = grad Q = 0,

``M`` SSPRK2 substeps of ``dt/M`` expand as

    u1 = u - dt F + dt^2/2 E - c_M dt^3 f k x E + O(dt^4),
    c_M = (M^2 - 1) / (6 M^2),

which is the cubic coefficient of (1 + x/M + x^2/(2 M^2))^M.  The residual
against this truncation must scale as dt^4.  The residual against the
coefficient (M^2 - 1)/(3 M^2) is reported alongside; it only scales as dt^3
for M > 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..barotropic import BarotropicState, barotropic_ssprk2_substep
from ..grid import Boundary, Grid, VectorField
from ..tendencies import PhysicalParams


def kx(w) -> np.ndarray:
    """k x (wx, wy) = (-wy, wx)."""
    return np.array([-w[1], w[0]])


def cubic_coefficient(M: int) -> Fraction:
    return Fraction(M * M - 1, 6 * M * M)


def printed_cubic_coefficient(M: int) -> Fraction:
    return Fraction(M * M - 1, 3 * M * M)


@dataclass
class TaylorOracle:
    """Expansion quantities for a uniform state, evaluated by formula."""

    f: float
    g: float
    ubar: np.ndarray
    G: np.ndarray
    grad_zeta: np.ndarray

    @property
    def F(self) -> np.ndarray:
        return self.f * kx(self.ubar) + self.g * self.grad_zeta - self.G

    @property
    def E(self) -> np.ndarray:
        return self.f * kx(self.F)

    # uniform fields: the gradient terms of P and Q vanish identically
    grad_P = property(lambda self: np.zeros(2))
    grad_Q = property(lambda self: np.zeros(2))

    def truncation(self, dt: float, coeff) -> np.ndarray:
        cubic = self.f * kx(self.E) + self.g * self.grad_Q
        return self.ubar - dt * self.F + 0.5 * dt * dt * (self.E + self.g * self.grad_P) \
            - float(coeff) * dt ** 3 * cubic


def coefficient_substep(oracle: TaylorOracle, dt: float, M: int) -> np.ndarray:
    """SSPRK2 substepping on the 2-component coefficient system.

    Works with any uniform SSH gradient, which a periodic grid cannot hold.
    """
    tau = dt / M
    b = oracle.G - oracle.g * oracle.grad_zeta

    def rhs(u):
        return -oracle.f * kx(u) + b

    u = np.array(oracle.ubar, dtype=float)
    for _ in range(M):
        u1 = u + tau * rhs(u)
        u2 = u1 + tau * rhs(u1)
        u = 0.5 * (u + u2)
    return u


def kernel_substep(oracle: TaylorOracle, dt: float, M: int, n: int = 4) -> np.ndarray:
    """Run the production substep on a uniform doubly periodic state (flat SSH)."""
    if np.any(oracle.grad_zeta != 0):
        raise ValueError("a periodic grid cannot represent a uniform SSH gradient")
    grid = Grid(n, n, 1e3, 1e3, Boundary.PERIODIC)
    ubar = VectorField(np.full(grid.u_shape, oracle.ubar[0]), np.full(grid.v_shape, oracle.ubar[1]))
    G = VectorField(np.full(grid.u_shape, oracle.G[0]), np.full(grid.v_shape, oracle.G[1]))
    state = BarotropicState(ubar, np.zeros(grid.cell_shape), np.full(grid.cell_shape, 100.0))
    params = PhysicalParams(f=oracle.f, g=oracle.g)
    res = barotropic_ssprk2_substep(state, G, params, grid, dt, M)
    return np.array([res.ubar_final.u.mean(), res.ubar_final.v.mean()])


@dataclass
class TaylorRow:
    dt: float
    residual: float
    exponent: float
    residual_printed: float
    exponent_printed: float

    FIELDS = ("dt", "residual", "exponent", "residual_printed", "exponent_printed")


def run_taylor_check(params: PhysicalParams, dts, M: int, ubar=(0.8, -0.5), G=(2e-5, 1e-5),
                     grad_zeta=(0.0, 0.0), use_kernel: bool = True) -> list[TaylorRow]:
    """Residual of the substep output against the cubic truncation for each ``dt``.

    ``exponent`` is log2 of the residual ratio to the previous (twice as
    large) ``dt``; NaN on the first row.
    """
    oracle = TaylorOracle(params.f, params.g, np.asarray(ubar, float), np.asarray(G, float),
                          np.asarray(grad_zeta, float))
    use_kernel = use_kernel and not np.any(oracle.grad_zeta != 0)
    rows, prev = [], None
    for dt in dts:
        out = kernel_substep(oracle, dt, M) if use_kernel else coefficient_substep(oracle, dt, M)
        r = float(np.linalg.norm(out - oracle.truncation(dt, cubic_coefficient(M))))
        rp = float(np.linalg.norm(out - oracle.truncation(dt, printed_cubic_coefficient(M))))
        if prev is None:
            e = ep = math.nan
        else:
            e = _exponent(prev[0], r, prev[2] / dt)
            ep = _exponent(prev[1], rp, prev[2] / dt)
        rows.append(TaylorRow(float(dt), r, e, rp, ep))
        prev = (r, rp, dt)
    return rows


def _exponent(r_coarse, r_fine, ratio):
    if r_coarse <= 0 or r_fine <= 0:
        return math.nan
    return math.log(r_coarse / r_fine) / math.log(ratio)
