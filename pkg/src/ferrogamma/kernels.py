"""Backend selection and validated entry points for the hot kernels.

The compiled extension (`ferrogamma._kernels_cy`) is used when importable;
otherwise the NumPy implementation takes over.  `FERRO_GAMMA_BACKEND=numpy`
forces the fallback, `FERRO_GAMMA_THREADS` caps the thread count of the
compiled kernels (0 or unset = all cores).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_np
from .errors import OutOfRangeError

if os.environ.get("FERRO_GAMMA_BACKEND", "").lower() == "numpy":
    _impl = _kernels_np
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_np
        BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND


def thread_count() -> int:
    try:
        return max(0, int(os.environ.get("FERRO_GAMMA_THREADS", "0")))
    except ValueError:
        return 0


def _check_in_range(grid, pts):
    o = np.asarray(grid.origin)
    h = grid.spacing
    dims = np.asarray(grid.dims)
    t = (pts - o) / h - 0.5
    bad = (t < 0).any(axis=1) | (t >= dims - 1).any(axis=1)
    if bad.any():
        first = int(np.nonzero(bad)[0][0])
        raise OutOfRangeError(
            f"point {pts[first]} outside the trilinear range of grid "
            f"origin={grid.origin} spacing={grid.spacing} dims={grid.dims}"
        )


def surface_to_grid(grid, nodes, values, diag_kernel, eps, alpha, r_cut,
                    center, node_radius):
    values = np.ascontiguousarray(values, dtype=np.float64)
    if not np.any(values):
        return np.zeros(grid.dims)
    return _impl.surface_to_grid(
        grid.origin, grid.spacing, grid.dims,
        np.ascontiguousarray(nodes, dtype=np.float64),
        values,
        np.ascontiguousarray(diag_kernel, dtype=np.float64),
        float(eps), float(alpha), float(r_cut),
        tuple(float(c) for c in center), float(node_radius),
        thread_count(),
    )


def surface_gather(grid, q, nodes, diag_kernel, eps, alpha, r_cut):
    return _impl.surface_gather(
        grid.origin, grid.spacing, grid.dims,
        np.ascontiguousarray(q, dtype=np.float64),
        np.ascontiguousarray(nodes, dtype=np.float64),
        np.ascontiguousarray(diag_kernel, dtype=np.float64),
        float(eps), float(alpha), float(r_cut),
        thread_count(),
    )


def pair_rows(nodes, weighted_b, diag_kernel, eps, alpha):
    return _impl.pair_rows(
        np.ascontiguousarray(nodes, dtype=np.float64),
        np.ascontiguousarray(weighted_b, dtype=np.float64),
        np.ascontiguousarray(diag_kernel, dtype=np.float64),
        float(eps), float(alpha), thread_count(),
    )


def h_half_rows(nodes, hvals, weights):
    return _impl.h_half_rows(
        np.ascontiguousarray(nodes, dtype=np.float64),
        np.ascontiguousarray(hvals, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        thread_count(),
    )


def trilinear_gather(grid, arr, pts):
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    _check_in_range(grid, pts)
    return _impl.trilinear_gather(
        grid.origin, grid.spacing, grid.dims,
        np.ascontiguousarray(arr, dtype=np.float64), pts, thread_count(),
    )


def trilinear_scatter(grid, out, pts, vals):
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    _check_in_range(grid, pts)
    _impl.trilinear_scatter(
        grid.origin, grid.spacing, grid.dims, out, pts,
        np.ascontiguousarray(vals, dtype=np.float64), thread_count(),
    )
    return out
