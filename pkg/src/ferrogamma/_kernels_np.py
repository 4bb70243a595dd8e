"""NumPy reference implementations of the hot kernels.

Fallback backend when the compiled extension is unavailable, and the ground
truth the compiled one is tested against.  The pair rules must stay identical
across backends: contributions beyond r_cut are dropped, and pairs closer
than h/2 use the precomputed regularized kernel value.

Preconditions (bounds checks, shape checks) are enforced by the dispatcher
in kernels.py, not here.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 16384


def surface_to_grid(origin, h, dims, nodes, values, diag_kernel, eps, alpha,
                    r_cut, center, node_radius, num_threads=0):
    """out[cell] = sum_j K(|x_cell - node_j|) * values[j].

    K(d) = diag_kernel[j] for d < h/2, the Yukawa kernel for h/2 <= d <= r_cut,
    0 beyond r_cut.  Cells farther than r_cut from the node sphere (radius
    `node_radius` about `center`) are skipped wholesale.
    """
    nx, ny, nz = dims
    out = np.zeros((nx, ny, nz))
    n = nodes.shape[0]
    if n == 0:
        return out
    k = alpha / eps
    coef = 1.0 / (4.0 * np.pi * eps * eps)
    near2 = 0.25 * h * h
    rc2 = r_cut * r_cut
    near_contrib = values * diag_kernel

    ys = origin[1] + (np.arange(ny) + 0.5) * h
    zs = origin[2] + (np.arange(nz) + 0.5) * h
    Y, Z = np.meshgrid(ys, zs, indexing="ij")
    yz = np.stack([Y.ravel(), Z.ravel()], axis=1)
    cy2 = (yz[:, 0] - center[1]) ** 2
    cz2 = (yz[:, 1] - center[2]) ** 2

    for i in range(nx):
        x = origin[0] + (i + 0.5) * h
        rho = np.sqrt((x - center[0]) ** 2 + cy2 + cz2)
        live = np.nonzero(np.abs(rho - node_radius) <= r_cut)[0]
        if live.size == 0:
            continue
        plane = np.zeros(ny * nz)
        for start in range(0, live.size, _CHUNK):
            sel = live[start:start + _CHUNK]
            dx2 = (x - nodes[:, 0]) ** 2
            d2 = (
                dx2[None, :]
                + (yz[sel, 0, None] - nodes[None, :, 1]) ** 2
                + (yz[sel, 1, None] - nodes[None, :, 2]) ** 2
            )
            far = d2 > rc2
            near = d2 < near2
            mid = ~(far | near)
            d = np.sqrt(d2, where=mid, out=np.ones_like(d2))
            contrib = np.zeros_like(d2)
            contrib[mid] = (coef * np.exp(-k * d) / d * values[None, :])[mid]
            contrib[near] = np.broadcast_to(near_contrib, d2.shape)[near]
            plane[sel] = contrib.sum(axis=1)
        out[i] = plane.reshape(ny, nz)
    return out


def surface_gather(origin, h, dims, q, nodes, diag_kernel, eps, alpha, r_cut,
                   num_threads=0):
    """out[j] = sum_cells K(|x_cell - node_j|) * q[cell]; transpose of
    surface_to_grid in the (cell, node) pairing."""
    n = nodes.shape[0]
    out = np.zeros(n)
    k = alpha / eps
    coef = 1.0 / (4.0 * np.pi * eps * eps)
    near2 = 0.25 * h * h
    rc2 = r_cut * r_cut
    xs = origin[0] + (np.arange(dims[0]) + 0.5) * h
    ys = origin[1] + (np.arange(dims[1]) + 0.5) * h
    zs = origin[2] + (np.arange(dims[2]) + 0.5) * h

    for j in range(n):
        nj = nodes[j]
        ilo = max(0, int(np.ceil((nj[0] - r_cut - origin[0]) / h - 0.5)))
        ihi = min(dims[0], int(np.floor((nj[0] + r_cut - origin[0]) / h - 0.5)) + 1)
        jlo = max(0, int(np.ceil((nj[1] - r_cut - origin[1]) / h - 0.5)))
        jhi = min(dims[1], int(np.floor((nj[1] + r_cut - origin[1]) / h - 0.5)) + 1)
        llo = max(0, int(np.ceil((nj[2] - r_cut - origin[2]) / h - 0.5)))
        lhi = min(dims[2], int(np.floor((nj[2] + r_cut - origin[2]) / h - 0.5)) + 1)
        if ilo >= ihi or jlo >= jhi or llo >= lhi:
            continue
        dx = xs[ilo:ihi] - nj[0]
        dy = ys[jlo:jhi] - nj[1]
        dz = zs[llo:lhi] - nj[2]
        d2 = dx[:, None, None] ** 2 + dy[None, :, None] ** 2 + dz[None, None, :] ** 2
        block = q[ilo:ihi, jlo:jhi, llo:lhi]
        far = d2 > rc2
        near = d2 < near2
        mid = ~(far | near)
        kern = np.zeros_like(d2)
        d = np.sqrt(d2, where=mid, out=np.ones_like(d2))
        kern[mid] = coef * np.exp(-k * d[mid]) / d[mid]
        kern[near] = diag_kernel[j]
        out[j] = float((kern * block).sum())
    return out


def pair_rows(nodes, weighted_b, diag_kernel, eps, alpha, num_threads=0):
    """rows[i] = sum_j K~(i,j) * weighted_b[j], diagonal K~(i,i) = diag_kernel[i]."""
    n = nodes.shape[0]
    k = alpha / eps
    coef = 1.0 / (4.0 * np.pi * eps * eps)
    rows = np.empty(n)
    for start in range(0, n, 512):
        stop = min(n, start + 512)
        d2 = ((nodes[start:stop, None, :] - nodes[None, :, :]) ** 2).sum(axis=2)
        d = np.sqrt(d2)
        with np.errstate(divide="ignore", invalid="ignore"):
            kern = coef * np.exp(-k * d) / d
        for i in range(start, stop):
            kern[i - start, i] = diag_kernel[i]
        rows[start:stop] = kern @ weighted_b
    return rows


def h_half_rows(nodes, hvals, weights, num_threads=0):
    """rows[i] = w_i * sum_{j != i} w_j (h_i - h_j)^2 / |x_i - x_j|^3."""
    n = nodes.shape[0]
    rows = np.empty(n)
    for start in range(0, n, 512):
        stop = min(n, start + 512)
        d2 = ((nodes[start:stop, None, :] - nodes[None, :, :]) ** 2).sum(axis=2)
        num = (hvals[start:stop, None] - hvals[None, :]) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            term = num / d2**1.5
        for i in range(start, stop):
            term[i - start, i] = 0.0
        rows[start:stop] = weights[start:stop] * (term @ weights)
    return rows


def _trilinear_prep(origin, h, pts):
    t = (pts - np.asarray(origin)) / h - 0.5
    i0 = np.floor(t).astype(np.int64)
    return i0, t - i0


def trilinear_gather(origin, h, dims, arr, pts, num_threads=0):
    """Interpolate arr (shape dims) at pts; pts must be in range."""
    i0, f = _trilinear_prep(origin, h, pts)
    ix, iy, iz = i0[:, 0], i0[:, 1], i0[:, 2]
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
    gx, gy, gz = 1 - fx, 1 - fy, 1 - fz
    return (
        arr[ix, iy, iz] * gx * gy * gz
        + arr[ix + 1, iy, iz] * fx * gy * gz
        + arr[ix, iy + 1, iz] * gx * fy * gz
        + arr[ix, iy, iz + 1] * gx * gy * fz
        + arr[ix + 1, iy + 1, iz] * fx * fy * gz
        + arr[ix + 1, iy, iz + 1] * fx * gy * fz
        + arr[ix, iy + 1, iz + 1] * gx * fy * fz
        + arr[ix + 1, iy + 1, iz + 1] * fx * fy * fz
    )


def trilinear_scatter(origin, h, dims, out, pts, vals, num_threads=0):
    """Adjoint of trilinear_gather: out[stencil of p] += weight * vals."""
    i0, f = _trilinear_prep(origin, h, pts)
    ix, iy, iz = i0[:, 0], i0[:, 1], i0[:, 2]
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
    gx, gy, gz = 1 - fx, 1 - fy, 1 - fz
    np.add.at(out, (ix, iy, iz), vals * gx * gy * gz)
    np.add.at(out, (ix + 1, iy, iz), vals * fx * gy * gz)
    np.add.at(out, (ix, iy + 1, iz), vals * gx * fy * gz)
    np.add.at(out, (ix, iy, iz + 1), vals * gx * gy * fz)
    np.add.at(out, (ix + 1, iy + 1, iz), vals * fx * fy * gz)
    np.add.at(out, (ix + 1, iy, iz + 1), vals * fx * gy * fz)
    np.add.at(out, (ix, iy + 1, iz + 1), vals * gx * fy * fz)
    np.add.at(out, (ix + 1, iy + 1, iz + 1), vals * fx * fy * fz)
