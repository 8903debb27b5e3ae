"""Pure NumPy versions of the hot kernels (fallback for the compiled core)."""
from __future__ import annotations

import numpy as np

from .errors import BlowUpError, SolverError
from .grid import Grid, VectorField, divergence, face_average, gradient, perp


def _rhs(grid, ubar, zeta, H, G, f, g):
    flux = ubar * face_average(zeta + H, grid)
    du = G - (f * perp(ubar, grid) + g * gradient(zeta, grid))
    if grid.channel:
        du.v[0, :] = 0.0
        du.v[-1, :] = 0.0
    return du, -divergence(flux, grid), flux


def _finite(*xs):
    for x in xs:
        if isinstance(x, VectorField):
            if not x.isfinite():
                return False
        elif not np.isfinite(x).all():
            return False
    return True


def substep_ssprk2(grid: Grid, ubar: VectorField, zeta: np.ndarray, H: np.ndarray,
                   G: VectorField, f: float, g: float, dt: float, M: int):
    tau = dt / M
    u, z = ubar.copy(), zeta.copy()
    acc = grid.zeros_vector()
    for j in range(1, M + 1):
        du, dz, f0 = _rhs(grid, u, z, H, G, f, g)
        u1 = u + tau * du
        z1 = z + tau * dz
        du, dz, f1 = _rhs(grid, u1, z1, H, G, f, g)
        u2 = u1 + tau * du
        z2 = z1 + tau * dz
        u = 0.5 * (u + u2)
        z = 0.5 * (z + z2)
        acc = acc + (f0 + f1) / (2 * M)
        if not _finite(u, z):
            raise BlowUpError("barotropic SSPRK2 substepping", substep=j)
    return u, z, acc


def substep_ssprk3(grid: Grid, ubar: VectorField, zeta: np.ndarray, H: np.ndarray,
                   G: VectorField, f: float, g: float, dt: float, M: int):
    tau = dt / M
    u, z = ubar.copy(), zeta.copy()
    acc = grid.zeros_vector()
    for j in range(1, M + 1):
        du, dz, f0 = _rhs(grid, u, z, H, G, f, g)
        u1 = u + tau * du
        z1 = z + tau * dz
        du, dz, f1 = _rhs(grid, u1, z1, H, G, f, g)
        uh = 0.75 * u + 0.25 * (u1 + tau * du)
        zh = 0.75 * z + 0.25 * (z1 + tau * dz)
        du, dz, fh = _rhs(grid, uh, zh, H, G, f, g)
        u = (1.0 / 3.0) * u + (2.0 / 3.0) * (uh + tau * du)
        z = (1.0 / 3.0) * z + (2.0 / 3.0) * (zh + tau * dz)
        acc = acc + (f0 + f1) / (6 * M) + fh * (2.0 / (3 * M))
        if not _finite(u, z):
            raise BlowUpError("barotropic SSPRK3 substepping", substep=j)
    return u, z, acc


def tridiag_batched(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray,
                    rhs: np.ndarray) -> np.ndarray:
    """Thomas algorithm along axis 0, vectorised over the remaining axes.

    Row ``k`` reads ``lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k]``;
    ``lower[0]`` and ``upper[-1]`` are ignored.
    """
    L = diag.shape[0]
    cp = np.empty_like(diag, dtype=float)
    dp = np.empty_like(rhs, dtype=float)
    piv = diag[0]
    if (piv == 0).any():
        raise SolverError("zero pivot in row 0")
    cp[0] = upper[0] / piv
    dp[0] = rhs[0] / piv
    for k in range(1, L):
        piv = diag[k] - lower[k] * cp[k - 1]
        if (piv == 0).any():
            raise SolverError(f"zero pivot in row {k}")
        cp[k] = upper[k] / piv
        dp[k] = (rhs[k] - lower[k] * dp[k - 1]) / piv
    x = np.empty_like(dp)
    x[-1] = dp[-1]
    for k in range(L - 2, -1, -1):
        x[k] = dp[k] - cp[k] * x[k + 1]
    return x
