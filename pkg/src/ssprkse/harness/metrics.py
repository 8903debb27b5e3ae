"""Error norms used by the convergence tables."""
from __future__ import annotations

import numpy as np

from ..errors import DegenerateMetricError
from ..grid import VectorField


def _flat(x) -> np.ndarray:
    if isinstance(x, VectorField):
        return np.concatenate([np.ravel(x.u), np.ravel(x.v)])
    return np.ravel(np.asarray(x, dtype=float))


def relative_l2(test, ref) -> float:
    """||test - ref||_2 / ||ref||_2 for arrays or VectorFields of equal shape."""
    a, b = _flat(test), _flat(ref)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    # np.sum over a 1-D contiguous array has a fixed (pairwise) order
    den = float(np.sqrt(np.sum(b * b)))
    if den == 0.0:
        raise DegenerateMetricError("reference has zero norm")
    d = a - b
    return float(np.sqrt(np.sum(d * d))) / den


def top_layer_errors(state, ref) -> tuple[float, float]:
    """(velocity, thickness) relative errors of the top layer."""
    return (relative_l2(state.stack.u[0], ref.stack.u[0]),
            relative_l2(state.stack.h[0], ref.stack.h[0]))
