#!/usr/bin/env python3
"""Benchmark the compiled sweep kernel against the numpy fallback.

Runs the flux-difference sweep on realistic four-shock data at a few grid
sizes and prints per-call timings plus the speedup.  Threading of the
compiled kernel follows WENODS_THREADS (default 1).

Usage: python benchmarks/bench_sweep.py [--sizes 100,200,400] [--repeats 3]
"""

import argparse
import time

import numpy as np

from wenods._kernels import available_backends, reference
from wenods.cnn import random_model
from wenods.euler import GasModel, axis_wave_speed
from wenods.riemann import builtin_ic
from wenods.solver import FieldGrid, SchemeConfig, fill_ghosts


def sweep_lines(n, ghost):
    spec = builtin_ic("config3")
    grid = FieldGrid.from_riemann(spec, n, n, ghost)
    fill_ghosts(grid, "zero-gradient")
    gas = GasModel(spec.gamma)
    alpha = axis_wave_speed(grid.interior, gas, "x")
    lines = np.ascontiguousarray(grid.data.transpose(1, 0, 2)[ghost:ghost + n])
    return lines, alpha


def time_call(fn, repeats):
    fn()   # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="100,200,400")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--scheme", default="z", choices=["js", "z", "ds-js", "ds-z"])
    args = ap.parse_args()

    backends = {"reference": reference}
    if "fast" in available_backends():
        from wenods._kernels import _fast
        backends["fast"] = _fast
    else:
        print("compiled kernel not built; timing the fallback only")

    model = None
    ghost = 3
    if args.scheme.startswith("ds-"):
        model = random_model(np.random.default_rng(0), "A")

    print(f"scheme={args.scheme}")
    header = f"{'grid':>6} " + "".join(f"{name:>14} " for name in backends)
    print(header + ("speedup" if len(backends) == 2 else ""))
    for n in (int(s) for s in args.sizes.split(",")):
        lines, alpha = sweep_lines(n, ghost)
        timings = {}
        for name, mod in backends.items():
            timings[name] = time_call(
                lambda mod=mod: mod.sweep(lines, ghost, 1.4, alpha, n,
                                          args.scheme, 1e-6, 0.1, model=model),
                args.repeats)
        row = f"{n:>6} " + "".join(f"{timings[name] * 1e3:>12.1f}ms " for name in backends)
        if len(timings) == 2:
            row += f"{timings['reference'] / timings['fast']:>6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
