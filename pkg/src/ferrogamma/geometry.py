"""The ball domain, its cut-cell indicator, and icosphere surface quadrature.

The domain is a ball on purpose: the boundary is smooth, the outward normal
and surface area are analytic, and test integrals have closed forms.  The
surface quadrature subdivides an icosahedron, projects vertices to the
sphere, and places one node per triangle at the projected centroid; weights
are flat-triangle areas rescaled so they sum to 4*pi*R^2 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidFieldError
from .grid import Grid3, VectorField, make_centered_grid


@dataclass(frozen=True)
class SurfaceQuadrature:
    nodes: np.ndarray    # (n, 3) points on the sphere
    weights: np.ndarray  # (n,) positive areas, sum = 4*pi*R^2
    normals: np.ndarray  # (n, 3) outward unit normals

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.ascontiguousarray(self.nodes, dtype=np.float64))
        object.__setattr__(self, "weights", np.ascontiguousarray(self.weights, dtype=np.float64))
        object.__setattr__(self, "normals", np.ascontiguousarray(self.normals, dtype=np.float64))
        n = self.nodes.shape[0]
        if self.nodes.shape != (n, 3) or self.weights.shape != (n,) or self.normals.shape != (n, 3):
            raise InvalidFieldError("inconsistent surface quadrature arrays")
        if np.any(self.weights <= 0):
            raise InvalidFieldError("surface weights must be positive")

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def area(self) -> float:
        return float(self.weights.sum())


# Icosahedron on the unit sphere, vertices (0, ±1, ±phi) and cyclic shifts.
# This vertex set is invariant under cyclic axis permutation, which the
# symmetry-equivariance tests rely on.
_PHI = (1.0 + np.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array(
    [
        (0, 1, _PHI), (0, 1, -_PHI), (0, -1, _PHI), (0, -1, -_PHI),
        (1, _PHI, 0), (1, -_PHI, 0), (-1, _PHI, 0), (-1, -_PHI, 0),
        (_PHI, 0, 1), (-_PHI, 0, 1), (_PHI, 0, -1), (-_PHI, 0, -1),
    ],
    dtype=np.float64,
)
_ICO_VERTS /= np.linalg.norm(_ICO_VERTS, axis=1)[:, None]

_ICO_FACES = [
    (0, 2, 8), (0, 8, 4), (0, 4, 6), (0, 6, 9), (0, 9, 2),
    (3, 1, 10), (3, 10, 5), (3, 5, 7), (3, 7, 11), (3, 11, 1),
    (2, 5, 8), (8, 5, 10), (8, 10, 4), (4, 10, 1), (4, 1, 6),
    (6, 1, 11), (6, 11, 9), (9, 11, 7), (9, 7, 2), (2, 7, 5),
]


def _subdivide(verts: list, faces: list) -> tuple[list, list]:
    """Split each triangle in four; midpoints pushed to the unit sphere."""
    cache: dict[tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        if key in cache:
            return cache[key]
        m = verts[a] + verts[b]
        m = m / np.linalg.norm(m)
        verts.append(m)
        cache[key] = len(verts) - 1
        return cache[key]

    new_faces = []
    for a, b, c in faces:
        ab = midpoint(a, b)
        bc = midpoint(b, c)
        ca = midpoint(c, a)
        new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
    return verts, new_faces


def make_icosphere_quadrature(radius: float, level: int,
                              center=(0.0, 0.0, 0.0)) -> SurfaceQuadrature:
    """Centroid quadrature on the icosphere: 20 * 4**level nodes."""
    if level < 0:
        raise InvalidFieldError(f"icosphere level must be >= 0, got {level}")
    if radius <= 0:
        raise InvalidFieldError(f"radius must be positive, got {radius}")
    verts = [v.copy() for v in _ICO_VERTS]
    faces = list(_ICO_FACES)
    for _ in range(level):
        verts, faces = _subdivide(verts, faces)
    v = np.asarray(verts)
    f = np.asarray(faces)
    tri = v[f]  # (nfaces, 3, 3) on the unit sphere
    centroids = tri.mean(axis=1)
    centroids /= np.linalg.norm(centroids, axis=1)[:, None]
    flat_areas = 0.5 * np.linalg.norm(
        np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1
    ) * radius**2
    weights = flat_areas * (4.0 * np.pi * radius**2 / flat_areas.sum())
    nodes = np.asarray(center) + radius * centroids
    return SurfaceQuadrature(nodes=nodes, weights=weights, normals=centroids.copy())


@dataclass(frozen=True)
class DomainBall:
    """Ball domain with cut-cell volume fractions on a grid."""

    grid: Grid3
    center: tuple[float, float, float]
    radius: float
    indicator: np.ndarray  # (nx, ny, nz) occupancy fractions in [0, 1]
    surface: SurfaceQuadrature

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        ind = np.ascontiguousarray(self.indicator, dtype=np.float64)
        if ind.shape != self.grid.dims:
            raise InvalidFieldError("indicator shape does not match grid dims")
        object.__setattr__(self, "indicator", ind)

    @property
    def cell_measure(self) -> np.ndarray:
        """Per-cell volume weights indicator * h^3."""
        return self.indicator * self.grid.cell_volume

    def volume(self) -> float:
        return float(self.indicator.sum() * self.grid.cell_volume)


def ball_indicator(grid: Grid3, center, radius: float) -> np.ndarray:
    """Occupancy fractions: 1 inside, 0 outside, 2x2x2 subsampled in the cut
    band (cells the sphere can intersect)."""
    x, y, z = grid.meshgrid()
    cx, cy, cz = center
    dist = np.sqrt((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2)
    h = grid.spacing
    band = np.abs(dist - radius) <= (np.sqrt(3.0) / 2.0) * h
    ind = (dist < radius).astype(np.float64)
    bi, bj, bl = np.nonzero(band)
    if bi.size:
        xs = grid.axis_centers(0)[bi]
        ys = grid.axis_centers(1)[bj]
        zs = grid.axis_centers(2)[bl]
        offs = np.array([-0.25 * h, 0.25 * h])
        count = np.zeros(bi.size)
        for ox in offs:
            for oy in offs:
                for oz in offs:
                    d2 = (xs + ox - cx) ** 2 + (ys + oy - cy) ** 2 + (zs + oz - cz) ** 2
                    count += d2 <= radius**2
        ind[bi, bj, bl] = count / 8.0
    return ind


def make_ball_domain(grid: Grid3, radius: float, level: int,
                     center=(0.0, 0.0, 0.0)) -> DomainBall:
    surf = make_icosphere_quadrature(radius, level, center)
    ind = ball_indicator(grid, center, radius)
    return DomainBall(grid=grid, center=tuple(center), radius=radius,
                      indicator=ind, surface=surf)


def make_ball_setup(n: int, radius: float = 1.0, level: int = 3,
                    margin: float = 0.1) -> DomainBall:
    """Default lab setup: ball of given radius centered in a cube grid with
    `margin*radius` clearance on each side."""
    grid = make_centered_grid((1.0 + margin) * radius, n)
    return make_ball_domain(grid, radius, level)


def normal_trace(field: VectorField, surf: SurfaceQuadrature) -> np.ndarray:
    """P·nu at the quadrature nodes (trilinear interpolation per component)."""
    samples = np.zeros(surf.n_nodes)
    for c in range(3):
        samples += surf.normals[:, c] * kernels.trilinear_gather(
            field.grid, field.components[c], surf.nodes
        )
    return samples
