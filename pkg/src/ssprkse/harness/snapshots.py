"""State snapshots: one flat little-endian float64 file plus a text sidecar.

The binary holds, in order, h (L, ny, nx), u (L, ny, nx), v (L, nyv, nx),
zeta (ny, nx) and H (ny, nx).  The sidecar ``<name>.txt`` lists the grid,
layer count and time as ``key = value`` lines, enough to rebuild the state.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..grid import Grid, VectorField
from ..stepper import ModelState
from ..tendencies import LayerStack

DTYPE = "<f8"
ORDER = ("h", "u", "v", "zeta", "H")


def _arrays(state: ModelState):
    return (state.stack.h, state.stack.u.u, state.stack.u.v, state.zeta, state.H)


def write_snapshot(path: str | Path, state: ModelState, step: int | None = None, **extra) -> Path:
    path = Path(path).with_suffix(".bin")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        for a in _arrays(state):
            fh.write(np.ascontiguousarray(a, dtype=DTYPE).tobytes())
    g = state.grid
    meta = {"nx": g.nx, "ny": g.ny, "dx": repr(g.dx), "dy": repr(g.dy), "boundary": g.boundary.value,
            "layers": state.stack.nlayers, "time": repr(float(state.time)), "dtype": DTYPE,
            "order": ",".join(ORDER)}
    if step is not None:
        meta["step"] = step
    meta.update(extra)
    path.with_suffix(".txt").write_text("".join(f"{k} = {v}\n" for k, v in meta.items()))
    return path


def read_sidecar(path: str | Path) -> dict:
    meta = {}
    for line in Path(path).with_suffix(".txt").read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    return meta


def read_snapshot(path: str | Path) -> ModelState:
    meta = read_sidecar(path)
    grid = Grid(int(meta["nx"]), int(meta["ny"]), float(meta["dx"]), float(meta["dy"]), meta["boundary"])
    L = int(meta["layers"])
    shapes = [(L,) + grid.cell_shape, (L,) + grid.u_shape, (L,) + grid.v_shape,
              grid.cell_shape, grid.cell_shape]
    raw = np.fromfile(Path(path).with_suffix(".bin"), dtype=meta.get("dtype", DTYPE))
    need = sum(int(np.prod(s)) for s in shapes)
    if raw.size != need:
        raise ValueError(f"snapshot holds {raw.size} values, sidecar implies {need}")
    out, off = [], 0
    for s in shapes:
        n = int(np.prod(s))
        out.append(raw[off:off + n].reshape(s).astype(float))
        off += n
    h, u, v, zeta, H = out
    return ModelState(LayerStack(h, VectorField(u, v)), zeta, float(meta["time"]), H, grid)
