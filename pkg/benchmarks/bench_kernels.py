"""Compare the compiled and NumPy backends on the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from ssprkse import kernels
from ssprkse.harness.scenario import build_channel_scenario
from ssprkse.modesplit import split_velocity
from ssprkse.stepper import SchemeConfig, integrate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=int, default=1)
    args = ap.parse_args()
    sc = build_channel_scenario(scale=args.scale)
    st = sc.state
    ubar = split_velocity(st.stack, sc.grid).ubar
    G = sc.grid.zeros_vector()
    rng = np.random.default_rng(1)
    L, N = 32, 4096
    lo, up = rng.uniform(-1, 1, (L, N)), rng.uniform(-1, 1, (L, N))
    di = np.abs(lo) + np.abs(up) + 1.0
    rhs = rng.uniform(-1, 1, (L, N))

    cases = {
        "substep SSPRK2 (M=16)": lambda b: kernels.substep(2, sc.grid, ubar, st.zeta, st.H, G,
                                                           sc.params.f, sc.params.g, 64.0, 16, backend=b),
        "substep SSPRK3 (M=16)": lambda b: kernels.substep(3, sc.grid, ubar, st.zeta, st.H, G,
                                                           sc.params.f, sc.params.g, 64.0, 16, backend=b),
        f"tridiagonal {L}x{N}": lambda b: kernels.tridiag_batched(lo, di, up, rhs, backend=b),
    }
    print(f"grid {sc.grid.ny}x{sc.grid.nx}, backends available: {', '.join(kernels.BACKENDS)}")
    print(f"{'kernel':28s} {'python (ms)':>12s} {'compiled (ms)':>14s} {'speedup':>8s}")
    for name, fn in cases.items():
        tp = best_of(lambda: fn("python"), args.repeat)
        if "compiled" in kernels.BACKENDS:
            tc = best_of(lambda: fn("compiled"), args.repeat)
            print(f"{name:28s} {tp * 1e3:12.2f} {tc * 1e3:14.2f} {tp / tc:8.1f}x")
        else:
            print(f"{name:28s} {tp * 1e3:12.2f} {'n/a':>14s}")

    cfg = SchemeConfig("ssprk3se", dt=64.0, M=16)
    for b in kernels.BACKENDS:
        kernels.set_backend(b)
        t = best_of(lambda: integrate(st, sc.params, cfg, 8), max(1, args.repeat // 2))
        print(f"SSPRK3-SE 8 steps, M=16, {b:9s}: {t * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
