"""Uniform 3D Cartesian grids, discrete fields, and difference operators.

All fields are cell-centered: cell (i, j, l) sits at origin + (i+1/2, j+1/2,
l+1/2)*h.  Arrays are C-ordered with shape (nx, ny, nz), so the linear index
of a cell is (i*ny + j)*nz + l.  Derivatives use second-order central
differences in the interior and one-sided second-order stencils on the grid
faces, which keeps them exact for quadratic fields everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidFieldError


@dataclass(frozen=True)
class Grid3:
    """Uniform cell-centered grid over an axis-aligned box."""

    origin: tuple[float, float, float]
    spacing: float
    dims: tuple[int, int, int]

    def __post_init__(self):
        if self.spacing <= 0:
            raise InvalidFieldError(f"grid spacing must be positive, got {self.spacing}")
        if len(self.dims) != 3 or any(int(n) < 2 for n in self.dims):
            raise InvalidFieldError(f"grid dims must be >= 2 per axis, got {self.dims}")
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def ncells(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    def axis_centers(self, axis: int) -> np.ndarray:
        n = self.dims[axis]
        return self.origin[axis] + (np.arange(n) + 0.5) * self.spacing

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cell-center coordinates as three broadcastable (sparse) arrays."""
        x = self.axis_centers(0)[:, None, None]
        y = self.axis_centers(1)[None, :, None]
        z = self.axis_centers(2)[None, None, :]
        return x, y, z

    def expand(self, ncells: int) -> "Grid3":
        """Grid grown by `ncells` cells on every face (same spacing)."""
        h = self.spacing
        return Grid3(
            origin=tuple(o - ncells * h for o in self.origin),
            spacing=h,
            dims=tuple(n + 2 * ncells for n in self.dims),
        )


def make_centered_grid(half_width: float, n: int) -> Grid3:
    """Cube [-half_width, half_width]^3 with n cells per axis."""
    h = 2.0 * half_width / n
    return Grid3(origin=(-half_width,) * 3, spacing=h, dims=(n, n, n))


@dataclass(frozen=True)
class ScalarField:
    grid: Grid3
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != self.grid.dims:
            raise InvalidFieldError(
                f"scalar array shape {v.shape} does not match grid dims {self.grid.dims}"
            )
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class VectorField:
    grid: Grid3
    components: np.ndarray  # shape (3, nx, ny, nz)

    def __post_init__(self):
        c = np.ascontiguousarray(self.components, dtype=np.float64)
        if c.shape != (3,) + self.grid.dims:
            raise InvalidFieldError(
                f"vector array shape {c.shape} does not match grid dims {self.grid.dims}"
            )
        object.__setattr__(self, "components", c)

    def norm2(self) -> np.ndarray:
        """Pointwise |P|^2 with shape dims."""
        return np.einsum("cijk,cijk->ijk", self.components, self.components)


def from_function(grid: Grid3, fn) -> VectorField:
    """Sample fn(x, y, z) -> (p1, p2, p3) at cell centers (broadcast arrays)."""
    x, y, z = grid.meshgrid()
    p1, p2, p3 = fn(x, y, z)
    comps = np.empty((3,) + grid.dims)
    comps[0] = np.broadcast_to(p1, grid.dims)
    comps[1] = np.broadcast_to(p2, grid.dims)
    comps[2] = np.broadcast_to(p3, grid.dims)
    return VectorField(grid, comps)


def scalar_from_function(grid: Grid3, fn) -> ScalarField:
    x, y, z = grid.meshgrid()
    return ScalarField(grid, np.broadcast_to(fn(x, y, z), grid.dims).copy())


# ----------------------------------------------------------------------------
# Difference stencils.  diff() is the forward operator, diff_adjoint() its
# exact transpose; the pairing <diff(x), y> = <x, diff_adjoint(y)> holds to
# machine precision, which the energy gradients rely on.
# ----------------------------------------------------------------------------


def _axis_slicer(axis: int, sl: slice):
    full = [slice(None)] * 3
    full[axis] = sl
    return tuple(full)


def diff(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second-order d/dx_axis: central interior, one-sided on faces."""
    if arr.shape[axis] < 3:
        raise InvalidFieldError("differencing needs >= 3 cells per axis")
    c = 1.0 / (2.0 * h)
    out = np.empty_like(arr)
    sl = lambda s: _axis_slicer(axis, s)  # noqa: E731
    out[sl(slice(1, -1))] = (arr[sl(slice(2, None))] - arr[sl(slice(None, -2))]) * c
    out[sl(slice(0, 1))] = (
        -3.0 * arr[sl(slice(0, 1))] + 4.0 * arr[sl(slice(1, 2))] - arr[sl(slice(2, 3))]
    ) * c
    out[sl(slice(-1, None))] = (
        3.0 * arr[sl(slice(-1, None))] - 4.0 * arr[sl(slice(-2, -1))] + arr[sl(slice(-3, -2))]
    ) * c
    return out


def diff_adjoint(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Transpose of diff() with respect to the unweighted Euclidean pairing."""
    if arr.shape[axis] < 3:
        raise InvalidFieldError("differencing needs >= 3 cells per axis")
    c = 1.0 / (2.0 * h)
    out = np.zeros_like(arr)
    sl = lambda s: _axis_slicer(axis, s)  # noqa: E731
    g_int = arr[sl(slice(1, -1))]
    out[sl(slice(2, None))] += g_int * c
    out[sl(slice(None, -2))] -= g_int * c
    g0 = arr[sl(slice(0, 1))]
    out[sl(slice(0, 1))] += -3.0 * c * g0
    out[sl(slice(1, 2))] += 4.0 * c * g0
    out[sl(slice(2, 3))] += -c * g0
    g1 = arr[sl(slice(-1, None))]
    out[sl(slice(-1, None))] += 3.0 * c * g1
    out[sl(slice(-2, -1))] += -4.0 * c * g1
    out[sl(slice(-3, -2))] += c * g1
    return out


def divergence(field: VectorField) -> ScalarField:
    """div P with the mixed central/one-sided stencil."""
    g = field.grid
    h = g.spacing
    p = field.components
    vals = diff(p[0], 0, h)
    vals += diff(p[1], 1, h)
    vals += diff(p[2], 2, h)
    return ScalarField(g, vals)


def gradient(field: ScalarField) -> VectorField:
    g = field.grid
    h = g.spacing
    comps = np.empty((3,) + g.dims)
    for ax in range(3):
        comps[ax] = diff(field.values, ax, h)
    return VectorField(g, comps)


def curl(field: VectorField) -> VectorField:
    g = field.grid
    h = g.spacing
    p = field.components
    comps = np.empty((3,) + g.dims)
    comps[0] = diff(p[2], 1, h) - diff(p[1], 2, h)
    comps[1] = diff(p[0], 2, h) - diff(p[2], 0, h)
    comps[2] = diff(p[1], 0, h) - diff(p[0], 1, h)
    return VectorField(g, comps)
