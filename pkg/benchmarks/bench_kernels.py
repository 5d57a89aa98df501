"""Timing comparison of the compiled and pure-python kernel backends.

Runs the Laplacian apply, the SPD solve, and one full scheme step on
matched data, then prints a per-operation table with the speedup.

    python3 benchmarks/bench_kernels.py [--sizes 64,128,256] [--reps 50]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from migcon import kernels
from migcon.grid import Field, Grid, laplacian_apply, solve_spd
from migcon.motility import MotilitySpec
from migcon.scheme import DtPolicy, SimParams, advance, initial_state


def _time(fn, reps: int) -> float:
    fn()                                    # warm up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def _cases(n: int, reps: int):
    grid = Grid(lengths=(1.0, 1.0), cells=(n, n))
    gen = np.random.default_rng(0)
    f = Field(grid, 0.5 + gen.random((n, n)))
    diag = Field(grid, 0.5 + gen.random((n, n)))
    rhs = Field(grid, gen.random((n, n)))

    u0 = Field(grid, gen.random((n, n)))
    v0 = Field(grid, 0.5 + gen.random((n, n)))
    params = SimParams(motility=MotilitySpec.prototype(1.0), eps=1e-2,
                       dt=DtPolicy(kind="fixed", value=1e-4), t_end=1.0)
    state = initial_state(grid, u0, v0)

    yield f"laplacian {n}x{n}", reps, \
        lambda: laplacian_apply(grid, f)
    yield f"spd solve {n}x{n}", max(reps // 5, 3), \
        lambda: solve_spd(grid, diag, 1e-4, rhs)
    yield f"full step {n}x{n}", max(reps // 5, 3), \
        lambda: advance(grid, params, state, 1e-4)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="64,128,256")
    ap.add_argument("--reps", type=int, default=50)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; timing pure python only")

    rows = []
    for n in sizes:
        for label, reps, fn in _cases(n, args.reps):
            times = {}
            for b in backends:
                kernels.use(b)
                times[b] = _time(fn, reps)
            kernels.use(backends[0])
            rows.append((label, times))

    width = max(len(r[0]) for r in rows)
    head = f"{'operation':<{width}}  " + "".join(
        f"{b:>12}" for b in backends)
    if len(backends) == 2:
        head += f"{'speedup':>10}"
    print(head)
    for label, times in rows:
        line = f"{label:<{width}}  " + "".join(
            f"{times[b] * 1e3:>10.3f}ms" for b in backends)
        if len(times) == 2:
            line += f"{times['python'] / times['compiled']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
