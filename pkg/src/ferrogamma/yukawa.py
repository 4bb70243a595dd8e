"""Screened-Helmholtz fundamental solution and fast free-space convolutions.

The operator is eps^2*Laplace - alpha^2 with fundamental solution

    G_eps(r) = exp(-(alpha/eps) * r) / (4*pi*eps^2*r),

whose total mass is 1/alpha^2 in 3D and, rescaled by eps, 1/(2*alpha) on a
plane.  The screened potential of a polarization field P is recovered from
its sources by integration against G_eps:

    u = -conv_volume(div P) + conv_surface(P . nu),

with the volume part done by zero-padded FFT convolution and the surface
part by direct node summation.  Cells on top of a source sample use analytic
kernel averages (volume-equivalent ball in 3D, area-equivalent disk on the
surface) so the kernel mass identities survive discretization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.integrate import quad

from . import kernels
from .errors import (
    InvalidFieldError,
    InvalidTestFunctionError,
    KernelDomainError,
    SolverConfigError,
)
from .geometry import DomainBall, SurfaceQuadrature, normal_trace
from .grid import Grid3, ScalarField, VectorField, divergence, gradient

DECAY_TOL = 1e-3


@dataclass(frozen=True)
class SolverParams:
    """Screening parameters and free-space padding control.

    eps and alpha are the screening-scale constants of the operator;
    eps/alpha is the screening length.  pad_factor extends the grid by
    pad_factor * eps/alpha for the free-space convolution; the kernel mass
    beyond that radius is exp(-pad_factor) (3.4e-4 at the default 8).
    """

    eps: float
    alpha: float
    pad_factor: float = 8.0
    surface_mode: str = "direct_sum"

    def __post_init__(self):
        if self.eps <= 0:
            raise InvalidFieldError(f"eps must be positive, got {self.eps}")
        if self.alpha <= 0:
            raise InvalidFieldError(f"alpha must be positive, got {self.alpha}")
        if self.pad_factor <= 0:
            raise InvalidFieldError(f"pad_factor must be positive, got {self.pad_factor}")
        if self.surface_mode != "direct_sum":
            raise InvalidFieldError(f"unknown surface_mode {self.surface_mode!r}")

    @property
    def screening_length(self) -> float:
        return self.eps / self.alpha

    def pad_cells(self, h: float) -> int:
        return int(np.ceil(self.pad_factor * self.screening_length / h))


@dataclass(frozen=True)
class PotentialSolution:
    """u and grad u on the padded grid, plus the pad width in cells."""

    u: ScalarField
    grad_u: VectorField
    params: SolverParams
    n_pad: int

    def domain_slice(self) -> tuple[slice, slice, slice]:
        p = self.n_pad
        nx, ny, nz = self.u.grid.dims
        return (slice(p, nx - p), slice(p, ny - p), slice(p, nz - p))


def yukawa_kernel(r, params: SolverParams):
    """G_eps(r) for r > 0 (scalar or array)."""
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr <= 0):
        raise KernelDomainError("yukawa_kernel requires r > 0")
    val = np.exp(-params.alpha / params.eps * r_arr) / (4.0 * np.pi * params.eps**2 * r_arr)
    return float(val) if np.isscalar(r) else val


def kernel_mass_3d(params: SolverParams) -> float:
    """Radial quadrature of the full-space kernel mass; equals 1/alpha^2."""
    k = params.alpha / params.eps
    val, _ = quad(lambda r: r * np.exp(-k * r), 0.0, np.inf)
    return val / params.eps**2


def kernel_mass_2d(params: SolverParams) -> float:
    """Planar mass of eps*G_eps; equals 1/(2*alpha)."""
    k = params.alpha / params.eps
    val, _ = quad(lambda r: np.exp(-k * r), 0.0, np.inf)
    return val / (2.0 * params.eps)


def ball_average_kernel(params: SolverParams, h: float) -> float:
    """Mean of G_eps over the ball of volume h^3 (r = 0 sample replacement)."""
    r0 = h * (3.0 / (4.0 * np.pi)) ** (1.0 / 3.0)
    k = params.alpha / params.eps
    return (1.0 - np.exp(-k * r0) * (1.0 + k * r0)) / (params.alpha**2 * h**3)


def disk_average_kernel(params: SolverParams, area) -> np.ndarray:
    """Mean of G_eps over a disk of the given area (near-node replacement)."""
    area = np.asarray(area, dtype=np.float64)
    rho = np.sqrt(area / np.pi)
    k = params.alpha / params.eps
    return (1.0 - np.exp(-k * rho)) / (2.0 * params.eps * params.alpha * area)


# ----------------------------------------------------------------------------
# FFT volume convolution.  Sources live on the N^3 block of a grid; targets
# are the same block grown by n_pad cells per face.  The circular transform
# size M >= N + (N + 2*n_pad) - 1 guarantees exact linear convolution of the
# sampled kernel.  Kernel spectra are cached (descent re-solves constantly).
# ----------------------------------------------------------------------------

_SPECTRUM_CACHE: dict = {}
_SPECTRUM_CACHE_MAX = 2


def _kernel_spectrum(shape, h: float, params: SolverParams):
    key = (shape, h, params.eps, params.alpha)
    if key in _SPECTRUM_CACHE:
        return _SPECTRUM_CACHE[key]
    k = params.alpha / params.eps
    coef = 1.0 / (4.0 * np.pi * params.eps**2)
    axes = []
    for m in shape:
        idx = np.arange(m)
        signed = np.where(idx <= m // 2, idx, idx - m).astype(np.float64)
        axes.append((signed * h) ** 2)
    r2 = axes[0][:, None, None] + axes[1][None, :, None] + axes[2][None, None, :]
    r = np.sqrt(r2)
    with np.errstate(divide="ignore", invalid="ignore"):
        kern = coef * np.exp(-k * r) / r
    kern[0, 0, 0] = ball_average_kernel(params, h)
    spec = sfft.rfftn(kern, workers=_fft_workers())
    del kern
    if len(_SPECTRUM_CACHE) >= _SPECTRUM_CACHE_MAX:
        _SPECTRUM_CACHE.pop(next(iter(_SPECTRUM_CACHE)))
    _SPECTRUM_CACHE[key] = spec
    return spec


def _fft_workers() -> int:
    n = kernels.thread_count()
    return n if n > 0 else -1


def fft_apply(source: np.ndarray, grid: Grid3, params: SolverParams,
              n_pad: int = 0) -> np.ndarray:
    """sum_y K(x - y) * source[y] * h^3 for every cell x of the grid expanded
    by n_pad cells per face.  `source` is a raw density; the cell volume is
    applied here."""
    dims = grid.dims
    h = grid.spacing
    shape = tuple(sfft.next_fast_len(n + n + 2 * n_pad - 1, real=True) for n in dims)
    spec = _kernel_spectrum(shape, h, params)
    embedded = np.zeros(shape)
    embedded[
        n_pad:n_pad + dims[0], n_pad:n_pad + dims[1], n_pad:n_pad + dims[2]
    ] = source
    fsrc = sfft.rfftn(embedded, workers=_fft_workers())
    del embedded
    fsrc *= spec
    conv = sfft.irfftn(fsrc, s=shape, workers=_fft_workers())
    del fsrc
    out_dims = tuple(n + 2 * n_pad for n in dims)
    return conv[: out_dims[0], : out_dims[1], : out_dims[2]].copy() * h**3


def _check_decay(values: np.ndarray, what: str) -> None:
    vmax = float(np.max(np.abs(values)))
    if vmax == 0.0:
        return
    shell = np.concatenate([
        np.abs(values[0]).ravel(), np.abs(values[-1]).ravel(),
        np.abs(values[:, 0]).ravel(), np.abs(values[:, -1]).ravel(),
        np.abs(values[:, :, 0]).ravel(), np.abs(values[:, :, -1]).ravel(),
    ])
    rel = float(shell.max()) / vmax
    if rel > DECAY_TOL:
        raise SolverConfigError(
            f"{what} has not decayed on the padded boundary shell "
            f"(relative level {rel:.2e} > {DECAY_TOL:.0e}); increase pad_factor"
        )


def volume_convolve(f: ScalarField, dom: DomainBall, params: SolverParams,
                    padded: bool = True) -> ScalarField:
    """Convolve the indicator-masked density f over the ball with G_eps.

    With padded=True (the default) the result lives on the grid extended by
    pad_factor * eps/alpha and its boundary decay is verified; with
    padded=False it is restricted to the domain grid (cheap inner-energy
    path)."""
    if f.grid != dom.grid:
        raise InvalidFieldError("field and domain live on different grids")
    source = f.values * dom.indicator
    if padded:
        n_pad = params.pad_cells(dom.grid.spacing)
        vals = fft_apply(source, dom.grid, params, n_pad)
        _check_decay(vals, "volume convolution")
        return ScalarField(dom.grid.expand(n_pad), vals)
    return ScalarField(dom.grid, fft_apply(source, dom.grid, params, 0))


def surface_r_cut(grid: Grid3, center, node_radius: float,
                  params: SolverParams) -> float:
    """Surface-sum truncation radius: the padding length plus the clearance
    between the sphere and the grid faces, so every face cell of a padded
    grid still sees its (tiny) genuine contribution."""
    lo = np.asarray(grid.origin)
    hi = lo + np.asarray(grid.dims) * grid.spacing
    c = np.asarray(center)
    face_dist = float(np.min(np.minimum(c - lo, hi - c))) - node_radius
    return params.pad_factor * params.screening_length + max(face_dist, 0.0) + grid.spacing


def surface_convolve(h_samples, surf: SurfaceQuadrature, params: SolverParams,
                     target: Grid3, center=(0.0, 0.0, 0.0),
                     node_radius: float | None = None) -> ScalarField:
    """Direct summation sum_j G_eps(|x - node_j|) h_j w_j over the nodes,
    with the kernel replaced by its disk average within h/2 of a node."""
    h_samples = np.asarray(h_samples, dtype=np.float64)
    if h_samples.shape != (surf.n_nodes,):
        raise InvalidFieldError("surface samples not aligned with quadrature nodes")
    if node_radius is None:
        node_radius = float(np.linalg.norm(surf.nodes[0] - np.asarray(center)))
    diag = disk_average_kernel(params, surf.weights)
    r_cut = surface_r_cut(target, center, node_radius, params)
    vals = kernels.surface_to_grid(
        target, surf.nodes, h_samples * surf.weights, diag,
        params.eps, params.alpha, r_cut, center, node_radius,
    )
    return ScalarField(target, vals)


def surface_adjoint_sum(q: np.ndarray, surf: SurfaceQuadrature,
                        params: SolverParams, grid: Grid3,
                        center=(0.0, 0.0, 0.0),
                        node_radius: float | None = None) -> np.ndarray:
    """Transpose of surface_convolve's node->grid map: per node j the sum of
    K(|x - node_j|) q[x] over grid cells (no weight applied)."""
    if node_radius is None:
        node_radius = float(np.linalg.norm(surf.nodes[0] - np.asarray(center)))
    diag = disk_average_kernel(params, surf.weights)
    r_cut = surface_r_cut(grid, center, node_radius, params)
    return kernels.surface_gather(grid, q, surf.nodes, diag,
                                  params.eps, params.alpha, r_cut)


def solve_potential(P: VectorField, dom: DomainBall,
                    params: SolverParams) -> PotentialSolution:
    """Screened potential of P by the representation formula, on the padded
    grid, with its gradient."""
    if P.grid != dom.grid:
        raise InvalidFieldError("field and domain live on different grids")
    n_pad = params.pad_cells(dom.grid.spacing)
    padded_grid = dom.grid.expand(n_pad)
    div_p = divergence(P)
    u_vals = -fft_apply(div_p.values * dom.indicator, dom.grid, params, n_pad)
    trace = normal_trace(P, dom.surface)
    u_vals += surface_convolve(trace, dom.surface, params, padded_grid,
                               dom.center, dom.radius).values
    _check_decay(u_vals, "potential")
    u = ScalarField(padded_grid, u_vals)
    return PotentialSolution(u=u, grad_u=gradient(u), params=params, n_pad=n_pad)


def solve_potential_domain(P: VectorField, dom: DomainBall,
                           params: SolverParams) -> ScalarField:
    """u restricted to the domain grid (all that inner energies need); same
    pair sums as the padded solve, so values agree on the shared block."""
    if P.grid != dom.grid:
        raise InvalidFieldError("field and domain live on different grids")
    div_p = divergence(P)
    u_vals = -fft_apply(div_p.values * dom.indicator, dom.grid, params, 0)
    trace = normal_trace(P, dom.surface)
    u_vals += surface_convolve(trace, dom.surface, params, dom.grid,
                               dom.center, dom.radius).values
    return ScalarField(dom.grid, u_vals)


def weak_residual(sol: PotentialSolution, P: VectorField, dom: DomainBall,
                  phi: ScalarField) -> float:
    """Residual of the weak form: integrates eps^2 grad(u).grad(phi) +
    alpha^2 u phi + indicator (div P) phi minus the surface source term.
    phi must vanish on the padded grid's boundary shell."""
    if phi.grid != sol.u.grid:
        raise InvalidFieldError("test function must live on the solution's padded grid")
    pv = phi.values
    shell_max = max(
        float(np.max(np.abs(pv[0]))), float(np.max(np.abs(pv[-1]))),
        float(np.max(np.abs(pv[:, 0]))), float(np.max(np.abs(pv[:, -1]))),
        float(np.max(np.abs(pv[:, :, 0]))), float(np.max(np.abs(pv[:, :, -1]))),
    )
    if shell_max != 0.0:
        raise InvalidTestFunctionError(
            "test function is nonzero on the padded boundary shell"
        )
    params = sol.params
    h3 = sol.u.grid.cell_volume
    grad_phi = gradient(phi)
    res = h3 * float(
        np.sum(params.eps**2 * np.einsum(
            "cijk,cijk->", sol.grad_u.components, grad_phi.components))
        + params.alpha**2 * np.sum(sol.u.values * pv)
    )
    sl = sol.domain_slice()
    div_p = divergence(P)
    res += float(np.sum(dom.cell_measure * div_p.values * pv[sl]))
    trace = normal_trace(P, dom.surface)
    phi_nodes = kernels.trilinear_gather(phi.grid, pv, dom.surface.nodes)
    res -= float(np.sum(dom.surface.weights * trace * phi_nodes))
    return res
