# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: Yukawa surface sums, node pair sums, trilinear transfer.

Mirrors _kernels_np exactly (same pair rules, same truncation radius); the
test suite cross-checks the two backends.  Parallel loops only ever write
disjoint output slots, so results do not depend on the thread schedule.
"""

import numpy as np

cimport numpy as cnp
cimport openmp
from cython.parallel cimport prange
from libc.math cimport ceil, exp, fabs, floor, sqrt

cnp.import_array()

cdef double PI = 3.141592653589793238462643383279502884


cdef inline int _resolve_threads(int num_threads) noexcept:
    if num_threads > 0:
        return num_threads
    return openmp.omp_get_max_threads()


def surface_to_grid(origin, double h, dims, double[:, ::1] nodes,
                    double[::1] values, double[::1] diag_kernel,
                    double eps, double alpha, double r_cut,
                    center, double node_radius, int num_threads=0):
    cdef Py_ssize_t nx = dims[0], ny = dims[1], nz = dims[2]
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double cx = center[0], cy = center[1], cz = center[2]
    out_np = np.zeros((nx, ny, nz))
    cdef double[:, :, ::1] out = out_np
    cdef Py_ssize_t n = nodes.shape[0]
    if n == 0:
        return out_np
    cdef double k = alpha / eps
    cdef double coef = 1.0 / (4.0 * PI * eps * eps)
    cdef double near2 = 0.25 * h * h
    cdef double rc2 = r_cut * r_cut
    cdef int nt = _resolve_threads(num_threads)
    cdef Py_ssize_t i, j, l, m
    cdef double x, y, z, dx, dy, dz, d2, d, s, rho

    # contiguous per-axis node coordinates vectorize much better than the
    # strided (n, 3) layout
    nxs_np = np.ascontiguousarray(np.asarray(nodes)[:, 0])
    nys_np = np.ascontiguousarray(np.asarray(nodes)[:, 1])
    nzs_np = np.ascontiguousarray(np.asarray(nodes)[:, 2])
    cdef double[::1] nxs = nxs_np
    cdef double[::1] nys = nys_np
    cdef double[::1] nzs = nzs_np

    cdef double t, v
    with nogil:
        for i in prange(nx, schedule='static', num_threads=nt):
            x = ox + (i + 0.5) * h
            for j in range(ny):
                y = oy + (j + 0.5) * h
                for l in range(nz):
                    z = oz + (l + 0.5) * h
                    rho = sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy)
                               + (z - cz) * (z - cz))
                    if fabs(rho - node_radius) > r_cut:
                        continue
                    s = 0.0
                    # branch-free body so the compiler can vectorize exp
                    for m in range(n):
                        dx = x - nxs[m]
                        dy = y - nys[m]
                        dz = z - nzs[m]
                        d2 = dx * dx + dy * dy + dz * dz + 1e-300
                        d = sqrt(d2)
                        t = coef * exp(-k * d) / d
                        v = diag_kernel[m] if d2 < near2 else t
                        v = 0.0 if d2 > rc2 else v
                        s = s + values[m] * v
                    out[i, j, l] = s
    return out_np


def surface_gather(origin, double h, dims, double[:, :, ::1] q,
                   double[:, ::1] nodes, double[::1] diag_kernel,
                   double eps, double alpha, double r_cut, int num_threads=0):
    cdef Py_ssize_t nx = dims[0], ny = dims[1], nz = dims[2]
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef Py_ssize_t n = nodes.shape[0]
    out_np = np.zeros(n)
    cdef double[::1] out = out_np
    cdef double k = alpha / eps
    cdef double coef = 1.0 / (4.0 * PI * eps * eps)
    cdef double near2 = 0.25 * h * h
    cdef double rc2 = r_cut * r_cut
    cdef int nt = _resolve_threads(num_threads)
    cdef Py_ssize_t m, i, j, l, ilo, ihi, jlo, jhi, llo, lhi
    cdef double px, py, pz, x, dx, dy, dz, d2, d, s, t, v

    with nogil:
        for m in prange(n, schedule='dynamic', num_threads=nt):
            px = nodes[m, 0]
            py = nodes[m, 1]
            pz = nodes[m, 2]
            ilo = <Py_ssize_t>ceil((px - r_cut - ox) / h - 0.5)
            ihi = <Py_ssize_t>floor((px + r_cut - ox) / h - 0.5) + 1
            jlo = <Py_ssize_t>ceil((py - r_cut - oy) / h - 0.5)
            jhi = <Py_ssize_t>floor((py + r_cut - oy) / h - 0.5) + 1
            llo = <Py_ssize_t>ceil((pz - r_cut - oz) / h - 0.5)
            lhi = <Py_ssize_t>floor((pz + r_cut - oz) / h - 0.5) + 1
            if ilo < 0:
                ilo = 0
            if jlo < 0:
                jlo = 0
            if llo < 0:
                llo = 0
            if ihi > nx:
                ihi = nx
            if jhi > ny:
                jhi = ny
            if lhi > nz:
                lhi = nz
            s = 0.0
            for i in range(ilo, ihi):
                x = ox + (i + 0.5) * h
                dx = x - px
                for j in range(jlo, jhi):
                    dy = oy + (j + 0.5) * h - py
                    for l in range(llo, lhi):
                        dz = oz + (l + 0.5) * h - pz
                        d2 = dx * dx + dy * dy + dz * dz + 1e-300
                        d = sqrt(d2)
                        t = coef * exp(-k * d) / d
                        v = diag_kernel[m] if d2 < near2 else t
                        v = 0.0 if d2 > rc2 else v
                        s = s + q[i, j, l] * v
            out[m] = s
    return out_np


def pair_rows(double[:, ::1] nodes, double[::1] weighted_b,
              double[::1] diag_kernel, double eps, double alpha,
              int num_threads=0):
    cdef Py_ssize_t n = nodes.shape[0]
    out_np = np.empty(n)
    cdef double[::1] rows = out_np
    cdef double k = alpha / eps
    cdef double coef = 1.0 / (4.0 * PI * eps * eps)
    cdef int nt = _resolve_threads(num_threads)
    cdef Py_ssize_t i, j
    cdef double xi, yi, zi, dx, dy, dz, d, s

    with nogil:
        for i in prange(n, schedule='static', num_threads=nt):
            xi = nodes[i, 0]
            yi = nodes[i, 1]
            zi = nodes[i, 2]
            s = 0.0
            for j in range(n):
                if j == i:
                    s = s + diag_kernel[i] * weighted_b[i]
                else:
                    dx = xi - nodes[j, 0]
                    dy = yi - nodes[j, 1]
                    dz = zi - nodes[j, 2]
                    d = sqrt(dx * dx + dy * dy + dz * dz)
                    s = s + coef * exp(-k * d) / d * weighted_b[j]
            rows[i] = s
    return out_np


def h_half_rows(double[:, ::1] nodes, double[::1] hvals, double[::1] weights,
                int num_threads=0):
    cdef Py_ssize_t n = nodes.shape[0]
    out_np = np.empty(n)
    cdef double[::1] rows = out_np
    cdef int nt = _resolve_threads(num_threads)
    cdef Py_ssize_t i, j
    cdef double xi, yi, zi, dx, dy, dz, d2, dh, s

    with nogil:
        for i in prange(n, schedule='static', num_threads=nt):
            xi = nodes[i, 0]
            yi = nodes[i, 1]
            zi = nodes[i, 2]
            s = 0.0
            for j in range(n):
                if j == i:
                    continue
                dx = xi - nodes[j, 0]
                dy = yi - nodes[j, 1]
                dz = zi - nodes[j, 2]
                d2 = dx * dx + dy * dy + dz * dz
                dh = hvals[i] - hvals[j]
                s = s + weights[j] * dh * dh / (d2 * sqrt(d2))
            rows[i] = weights[i] * s
    return out_np


def trilinear_gather(origin, double h, dims, double[:, :, ::1] arr,
                     double[:, ::1] pts, int num_threads=0):
    cdef Py_ssize_t n = pts.shape[0]
    out_np = np.empty(n)
    cdef double[::1] out = out_np
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef Py_ssize_t m, ix, iy, iz
    cdef double tx, ty, tz, fx, fy, fz, gx, gy, gz

    for m in range(n):
        tx = (pts[m, 0] - ox) / h - 0.5
        ty = (pts[m, 1] - oy) / h - 0.5
        tz = (pts[m, 2] - oz) / h - 0.5
        ix = <Py_ssize_t>floor(tx)
        iy = <Py_ssize_t>floor(ty)
        iz = <Py_ssize_t>floor(tz)
        fx = tx - ix
        fy = ty - iy
        fz = tz - iz
        gx = 1.0 - fx
        gy = 1.0 - fy
        gz = 1.0 - fz
        out[m] = (arr[ix, iy, iz] * gx * gy * gz
                  + arr[ix + 1, iy, iz] * fx * gy * gz
                  + arr[ix, iy + 1, iz] * gx * fy * gz
                  + arr[ix, iy, iz + 1] * gx * gy * fz
                  + arr[ix + 1, iy + 1, iz] * fx * fy * gz
                  + arr[ix + 1, iy, iz + 1] * fx * gy * fz
                  + arr[ix, iy + 1, iz + 1] * gx * fy * fz
                  + arr[ix + 1, iy + 1, iz + 1] * fx * fy * fz)
    return out_np


def trilinear_scatter(origin, double h, dims, double[:, :, ::1] out,
                      double[:, ::1] pts, double[::1] vals, int num_threads=0):
    cdef Py_ssize_t n = pts.shape[0]
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef Py_ssize_t m, ix, iy, iz
    cdef double tx, ty, tz, fx, fy, fz, gx, gy, gz, v

    # Serial on purpose: stencils of nearby points overlap.
    for m in range(n):
        tx = (pts[m, 0] - ox) / h - 0.5
        ty = (pts[m, 1] - oy) / h - 0.5
        tz = (pts[m, 2] - oz) / h - 0.5
        ix = <Py_ssize_t>floor(tx)
        iy = <Py_ssize_t>floor(ty)
        iz = <Py_ssize_t>floor(tz)
        fx = tx - ix
        fy = ty - iy
        fz = tz - iz
        gx = 1.0 - fx
        gy = 1.0 - fy
        gz = 1.0 - fz
        v = vals[m]
        out[ix, iy, iz] += v * gx * gy * gz
        out[ix + 1, iy, iz] += v * fx * gy * gz
        out[ix, iy + 1, iz] += v * gx * fy * gz
        out[ix, iy, iz + 1] += v * gx * gy * fz
        out[ix + 1, iy + 1, iz] += v * fx * fy * gz
        out[ix + 1, iy, iz + 1] += v * fx * gy * fz
        out[ix, iy + 1, iz + 1] += v * gx * fy * fz
        out[ix + 1, iy + 1, iz + 1] += v * fx * fy * fz
