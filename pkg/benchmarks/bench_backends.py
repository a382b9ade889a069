#!/usr/bin/env python3
"""Benchmark the compiled RK4 engine against the pure-numpy fallback.

Times the two integration engines on the workloads that dominate real
runs: the infinite-range kernel (the quantitative default) and a dense
matrix kernel, both on the default 256-node grid.  Run after an editable
install:

    python3 benchmarks/bench_backends.py
"""

import math
import time

import numpy as np

import spinrephase as sr
from spinrephase import _engine_py

try:
    from spinrephase import _engine_cy
except ImportError:
    _engine_cy = None

TWO_PI = 2.0 * math.pi


def run(engine, kmat, n_steps, grid, spins):
    t0 = time.perf_counter()
    steps, sbar, fields, ok = engine.evolve_rk4(
        spins, grid.nodes, grid.weights, kmat,
        TWO_PI * 2.0, TWO_PI * 3.6, TWO_PI * 11.7, 5.46,
        5e-4, n_steps, n_steps, False,
    )
    assert ok
    return time.perf_counter() - t0, sbar[-1]


def bench(label, kmat, n_steps=20000, repeats=3):
    grid = sr.build_uniform(256, 18.0)
    spins = sr.SpinField.initial_transverse(len(grid)).spins
    results = {}
    engines = [("python", _engine_py)]
    if _engine_cy is not None:
        engines.append(("cython", _engine_cy))
    for name, engine in engines:
        best, sbar = min(
            (run(engine, kmat, n_steps, grid, spins) for _ in range(repeats)),
            key=lambda r: r[0],
        )
        results[name] = (best, sbar)
        rate = n_steps / best
        print(f"  {label:>16} | {name:>6}: {best * 1e3:8.1f} ms "
              f"({rate / 1e3:8.1f}k steps/s, {best / n_steps * 1e6:6.2f} us/step)")
    if len(results) == 2:
        t_py, s_py = results["python"]
        t_cy, s_cy = results["cython"]
        agree = float(np.max(np.abs(s_py - s_cy)))
        print(f"  {label:>16} | speedup {t_py / t_cy:5.1f}x, final-state agreement {agree:.1e}")


def main():
    print(f"active backend: {sr.BACKEND}")
    print(f"workload: 256-node grid, 20000 RK4 steps (10 s of dynamics at dt = 0.5 ms)")
    bench("infinite-range", None)
    grid = sr.build_uniform(256, 18.0)
    kmat = sr.build_kernel_matrix(grid, sr.KernelSpec.one_d())
    bench("one-d matrix", np.ascontiguousarray(kmat), n_steps=2000)
    if _engine_cy is None:
        print("compiled engine not built: install with `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
