"""Backend dispatch for the hot kernels.

The compiled ``_core`` extension is used when it imports; otherwise the NumPy
fallback in ``_pykernels`` runs.  ``SSPRKSE_BACKEND=python`` forces the
fallback.  Both backends share stencils but not floating-point evaluation
order, so results agree to round-off, not bit-for-bit; each backend is
deterministic on its own.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels
from .errors import BlowUpError, SolverError
from .grid import Grid, VectorField

try:
    from . import _core
except ImportError:  # pragma: no cover - depends on the build
    _core = None

BACKENDS = ("compiled", "python") if _core is not None else ("python",)
_backend = "python" if (_core is None or os.environ.get("SSPRKSE_BACKEND") == "python") else "compiled"


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {BACKENDS}")
    _backend = name


def _compiled_substep(order, grid, ubar, zeta, H, G, f, g, dt, M):
    u, v, z, au, av, bad = _core.substep(order, ubar.u, ubar.v, zeta, H, G.u, G.v,
                                         f, g, dt, M, grid.dx, grid.dy, grid.channel)
    if bad:
        raise BlowUpError(f"barotropic SSPRK{order} substepping", substep=bad)
    return VectorField(u, v), z, VectorField(au, av)


def substep(order: int, grid: Grid, ubar: VectorField, zeta: np.ndarray, H: np.ndarray,
            G: VectorField, f: float, g: float, dt: float, M: int, backend: str | None = None):
    backend = backend or _backend
    if backend == "compiled":
        return _compiled_substep(order, grid, ubar, zeta, H, G, f, g, dt, M)
    fn = _pykernels.substep_ssprk2 if order == 2 else _pykernels.substep_ssprk3
    # overflow is caught by the finiteness check after each substep
    with np.errstate(over="ignore", invalid="ignore"):
        return fn(grid, ubar, zeta, H, G, f, g, dt, M)


def tridiag_batched(lower, diag, upper, rhs, backend: str | None = None) -> np.ndarray:
    """Solve independent tridiagonal systems along axis 0."""
    backend = backend or _backend
    if backend == "compiled":
        shape = np.shape(rhs)
        L = shape[0]
        flat = [np.broadcast_to(a, shape).reshape(L, -1) for a in (lower, diag, upper, rhs)]
        x, bad = _core.tridiag_batched(*flat)
        if bad >= 0:
            raise SolverError(f"zero pivot in row {bad}")
        return x.reshape(shape)
    return _pykernels.tridiag_batched(*(np.asarray(a, dtype=float) for a in (lower, diag, upper, rhs)))
