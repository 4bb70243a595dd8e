"""Kernel closed forms, mass identities, convolutions, and the potential solve."""

import numpy as np
import pytest
from conftest import radial_solution

from ferrogamma import fields
from ferrogamma.errors import (
    InvalidTestFunctionError,
    KernelDomainError,
    SolverConfigError,
)
from ferrogamma.gammalab import get_setup
from ferrogamma.geometry import SurfaceQuadrature, make_ball_domain
from ferrogamma.grid import ScalarField, make_centered_grid, scalar_from_function
from ferrogamma.yukawa import (
    SolverParams,
    kernel_mass_2d,
    kernel_mass_3d,
    solve_potential,
    solve_potential_domain,
    surface_convolve,
    volume_convolve,
    weak_residual,
    yukawa_kernel,
)


def test_kernel_closed_form_values():
    assert yukawa_kernel(1.0, SolverParams(eps=1.0, alpha=1.0)) == pytest.approx(
        np.exp(-1.0) / (4 * np.pi), rel=1e-13)
    assert yukawa_kernel(0.5, SolverParams(eps=0.5, alpha=1.0)) == pytest.approx(
        np.exp(-1.0) / (4 * np.pi * 0.25 * 0.5), rel=1e-13)
    assert yukawa_kernel(0.5, SolverParams(eps=0.5, alpha=1.0)) == pytest.approx(
        0.234197, rel=1e-5)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_kernel_scaling_identity(alpha):
    # G_eps(r) = eps^-3 G_1(r/eps), exact from the closed form, any alpha.
    for eps, r in ((0.2, 0.7), (0.05, 0.3), (1.5, 2.0)):
        lhs = yukawa_kernel(r, SolverParams(eps=eps, alpha=alpha))
        rhs = eps**-3 * yukawa_kernel(r / eps, SolverParams(eps=1.0, alpha=alpha))
        assert lhs == pytest.approx(rhs, rel=1e-13)


def test_kernel_rejects_nonpositive_radius():
    p = SolverParams(eps=0.2, alpha=1.0)
    with pytest.raises(KernelDomainError):
        yukawa_kernel(0.0, p)
    with pytest.raises(KernelDomainError):
        yukawa_kernel(np.array([0.5, -1.0]), p)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("eps", [0.05, 0.2, 1.0])
def test_kernel_mass_identities(alpha, eps):
    p = SolverParams(eps=eps, alpha=alpha)
    assert kernel_mass_3d(p) == pytest.approx(1.0 / alpha**2, rel=1e-6)
    assert kernel_mass_2d(p) == pytest.approx(1.0 / (2.0 * alpha), rel=1e-6)


def test_kernel_mass_independent_of_eps():
    a = kernel_mass_3d(SolverParams(eps=0.1, alpha=1.0))
    b = kernel_mass_3d(SolverParams(eps=1.0, alpha=1.0))
    assert a == pytest.approx(b, rel=1e-6)


def test_volume_convolve_zero_and_linearity(dom24):
    p = SolverParams(eps=0.25, alpha=1.0)
    zero = ScalarField(dom24.grid, np.zeros(dom24.grid.dims))
    assert np.all(volume_convolve(zero, dom24, p, padded=False).values == 0.0)

    rng = np.random.default_rng(8)
    f = ScalarField(dom24.grid, rng.standard_normal(dom24.grid.dims))
    g = ScalarField(dom24.grid, rng.standard_normal(dom24.grid.dims))
    fg = ScalarField(dom24.grid, f.values + g.values)
    lhs = volume_convolve(fg, dom24, p, padded=False).values
    rhs = (volume_convolve(f, dom24, p, padded=False).values
           + volume_convolve(g, dom24, p, padded=False).values)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


def test_volume_convolve_center_value_closed_form():
    # f = 1 on the unit ball at eps = 0.2:
    # int_0^R G 4 pi r^2 dr = (1/a^2)(1 - e^{-aR/e}(1 + aR/e)) ~ 0.95957.
    dom = get_setup(49, level=2)
    p = SolverParams(eps=0.2, alpha=1.0)
    f = ScalarField(dom.grid, np.ones(dom.grid.dims))
    conv = volume_convolve(f, dom, p, padded=False)
    exact = 1.0 - np.exp(-5.0) * 6.0
    assert exact == pytest.approx(0.95957, rel=1e-5)
    assert conv.values[24, 24, 24] == pytest.approx(exact, rel=0.01)


def test_volume_convolve_operator_symmetry(dom24):
    p = SolverParams(eps=0.2, alpha=1.0)
    rng = np.random.default_rng(9)
    f = ScalarField(dom24.grid, rng.standard_normal(dom24.grid.dims))
    g = ScalarField(dom24.grid, rng.standard_normal(dom24.grid.dims))
    m = dom24.cell_measure
    lhs = float(np.sum(m * volume_convolve(f, dom24, p, padded=False).values * g.values))
    rhs = float(np.sum(m * f.values * volume_convolve(g, dom24, p, padded=False).values))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_volume_convolve_padding_too_small():
    dom = get_setup(24, level=2)
    f = ScalarField(dom.grid, np.ones(dom.grid.dims))
    with pytest.raises(SolverConfigError):
        volume_convolve(f, dom, SolverParams(eps=0.4, alpha=1.0, pad_factor=1.5))


def test_surface_convolve_zero_and_single_node():
    grid = make_centered_grid(1.1, 20)
    p = SolverParams(eps=0.3, alpha=1.0)
    quad = SurfaceQuadrature(
        nodes=np.array([[0.5, 0.0, 0.0]]),
        weights=np.array([0.2]),
        normals=np.array([[1.0, 0.0, 0.0]]),
    )
    zero = surface_convolve(np.zeros(1), quad, p, grid, node_radius=0.5)
    assert np.all(zero.values == 0.0)
    out = surface_convolve(np.ones(1), quad, p, grid, node_radius=0.5)
    # pick a target cell at distance >> h from the node
    i, j, l = 2, 10, 10
    x = np.array([grid.axis_centers(0)[i], grid.axis_centers(1)[j],
                  grid.axis_centers(2)[l]])
    d = np.linalg.norm(x - quad.nodes[0])
    assert out.values[i, j, l] == pytest.approx(0.2 * yukawa_kernel(d, p), rel=1e-12)


def test_surface_convolve_constant_density_center_value():
    # h = 1 on the unit sphere evaluated at the center: 4 pi R^2 G(R).
    dom = get_setup(49, level=3)
    p = SolverParams(eps=0.2, alpha=1.0)
    out = surface_convolve(np.ones(dom.surface.n_nodes), dom.surface, p,
                           dom.grid, dom.center, dom.radius)
    exact = np.exp(-5.0) / 0.04
    assert exact == pytest.approx(0.168449, rel=1e-5)
    assert out.values[24, 24, 24] == pytest.approx(exact, rel=1e-10)


def test_solve_potential_zero_field(dom24):
    from ferrogamma.grid import VectorField

    zero = VectorField(dom24.grid, np.zeros((3,) + dom24.grid.dims))
    sol = solve_potential(zero, dom24, SolverParams(eps=0.25, alpha=1.0))
    assert np.all(sol.u.values == 0.0)
    # rotation field: both sources vanish identically on the grid
    P = fields.rigid_rotation(dom24.grid)
    sol_rot = solve_potential(P, dom24, SolverParams(eps=0.25, alpha=1.0))
    assert np.max(np.abs(sol_rot.u.values)) <= 1e-14


def test_solve_potential_matches_radial_oracle():
    dom = get_setup(49, level=3)
    p = SolverParams(eps=0.2, alpha=1.0)
    P = fields.radial(dom.grid)
    u = solve_potential_domain(P, dom, p)
    u_exact, _ = radial_solution(0.2, 1.0)
    center = u.values[24, 24, 24]
    assert center == pytest.approx(float(u_exact(0.0)), rel=0.01)
    # off-center sample along a diagonal
    i = 30
    x = dom.grid.axis_centers(0)[i]
    r = np.sqrt(3.0) * abs(x)
    assert u.values[i, i, i] == pytest.approx(float(u_exact(r)), rel=0.02)


def test_potential_decay_invariants(dom24):
    P = fields.radial(dom24.grid)
    sol = solve_potential(P, dom24, SolverParams(eps=0.25, alpha=1.0))
    vals = sol.u.values
    shell = max(np.max(np.abs(vals[0])), np.max(np.abs(vals[-1])),
                np.max(np.abs(vals[:, 0])), np.max(np.abs(vals[:, -1])),
                np.max(np.abs(vals[:, :, 0])), np.max(np.abs(vals[:, :, -1])))
    assert shell <= 1e-3 * np.max(np.abs(vals))


def _bump_on(grid, width=0.45):
    phi = scalar_from_function(
        grid, lambda x, y, z: np.exp(-(x**2 + y**2 + z**2) / (2 * width**2)))
    vals = phi.values.copy()
    vals[0] = vals[-1] = 0.0
    vals[:, 0] = vals[:, -1] = 0.0
    vals[:, :, 0] = vals[:, :, -1] = 0.0
    return ScalarField(grid, vals)


def test_weak_residual_zero_field_and_linearity(dom24):
    p = SolverParams(eps=0.3, alpha=1.0)
    P0 = fields.radial(dom24.grid)
    zero = type(P0)(dom24.grid, np.zeros_like(P0.components))
    sol = solve_potential(zero, dom24, p)
    phi = _bump_on(sol.u.grid)
    assert weak_residual(sol, zero, dom24, phi) == pytest.approx(0.0, abs=1e-12)

    sol_r = solve_potential(P0, dom24, p)
    rng = np.random.default_rng(12)
    v1 = _bump_on(sol_r.u.grid).values * rng.uniform(0.5, 1.5)
    v2 = _bump_on(sol_r.u.grid, width=0.3).values
    r1 = weak_residual(sol_r, P0, dom24, ScalarField(sol_r.u.grid, v1))
    r2 = weak_residual(sol_r, P0, dom24, ScalarField(sol_r.u.grid, v2))
    r12 = weak_residual(sol_r, P0, dom24, ScalarField(sol_r.u.grid, v1 + v2))
    assert r12 == pytest.approx(r1 + r2, rel=1e-10)


def test_weak_residual_shrinks_under_refinement():
    p = SolverParams(eps=0.3, alpha=1.0)
    residuals = []
    for n in (24, 48):
        dom = get_setup(n, level=2)
        P = fields.radial(dom.grid)
        sol = solve_potential(P, dom, p)
        phi = _bump_on(sol.u.grid)
        residuals.append(abs(weak_residual(sol, P, dom, phi)))
    assert residuals[1] <= residuals[0] / 3.0


def test_weak_residual_rejects_nonzero_shell(dom24):
    p = SolverParams(eps=0.3, alpha=1.0)
    P = fields.radial(dom24.grid)
    sol = solve_potential(P, dom24, p)
    bad = ScalarField(sol.u.grid, np.ones(sol.u.grid.dims))
    with pytest.raises(InvalidTestFunctionError):
        weak_residual(sol, P, dom24, bad)


def test_solver_params_validation():
    with pytest.raises(Exception):
        SolverParams(eps=-0.1, alpha=1.0)
    with pytest.raises(Exception):
        SolverParams(eps=0.1, alpha=0.0)
    with pytest.raises(Exception):
        SolverParams(eps=0.1, alpha=1.0, surface_mode="spread")
