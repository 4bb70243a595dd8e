#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the node-to-grid Yukawa summation (the solver's hot loop), its grid-to-
node transpose, the node pair sums, and the trilinear transfer, and reports
the speedup.  Sizes mirror a typical potential solve: a 64^3 grid block
against a level-3 icosphere (1280 nodes).

    python3 benchmarks/bench_kernels.py [--n 64] [--level 3] [--repeat 3]
"""

import argparse
import time

import numpy as np

from ferrogamma import _kernels_np
from ferrogamma.geometry import make_icosphere_quadrature
from ferrogamma.grid import make_centered_grid
from ferrogamma.yukawa import SolverParams, disk_average_kernel

try:
    from ferrogamma import _kernels_cy
except ImportError:
    _kernels_cy = None


def timeit(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64, help="grid cells per axis")
    ap.add_argument("--level", type=int, default=3, help="icosphere level")
    ap.add_argument("--eps", type=float, default=0.2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    grid = make_centered_grid(1.1, args.n)
    quad = make_icosphere_quadrature(1.0, args.level)
    params = SolverParams(eps=args.eps, alpha=1.0)
    diag = disk_average_kernel(params, quad.weights)
    rng = np.random.default_rng(0)
    values = rng.standard_normal(quad.n_nodes)
    q = rng.standard_normal(grid.dims)
    r_cut = params.pad_factor * params.screening_length + 0.2

    print(f"grid {args.n}^3, {quad.n_nodes} nodes, eps={args.eps}, "
          f"r_cut={r_cut:.2f}")
    backends = [("numpy", _kernels_np)]
    if _kernels_cy is not None:
        backends.append(("cython", _kernels_cy))
    else:
        print("compiled backend not built; run pip install -e . first")

    cases = {
        "surface_to_grid": lambda impl: impl.surface_to_grid(
            grid.origin, grid.spacing, grid.dims, quad.nodes, values, diag,
            params.eps, params.alpha, r_cut, (0.0, 0.0, 0.0), 1.0, 0),
        "surface_gather": lambda impl: impl.surface_gather(
            grid.origin, grid.spacing, grid.dims, q, quad.nodes, diag,
            params.eps, params.alpha, r_cut, 0),
        "pair_rows": lambda impl: impl.pair_rows(
            quad.nodes, quad.weights * values, diag, params.eps,
            params.alpha, 0),
        "h_half_rows": lambda impl: impl.h_half_rows(
            quad.nodes, values, quad.weights, 0),
        "trilinear_gather": lambda impl: impl.trilinear_gather(
            grid.origin, grid.spacing, grid.dims, q, quad.nodes, 0),
    }

    for name, case in cases.items():
        times = {}
        results = {}
        for bname, impl in backends:
            times[bname], results[bname] = timeit(lambda: case(impl),
                                                  args.repeat)
        line = f"{name:18s}"
        for bname, _ in backends:
            line += f"  {bname}: {times[bname]*1e3:9.2f} ms"
        if len(backends) == 2:
            a = np.asarray(results["numpy"], dtype=float)
            b = np.asarray(results["cython"], dtype=float)
            rel = np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300)
            line += (f"  speedup {times['numpy']/times['cython']:6.1f}x"
                     f"  max rel diff {rel:.1e}")
        print(line)


if __name__ == "__main__":
    main()
