"""Shared fixtures and independent oracles for the test suite.

The oracles here are closed-form or 1D-quadrature solutions derived
independently of the solver code paths they validate: the screened radial
two-sided solution for the field P = x, the single-mode solution for the
divergence of the tangential-splay field, and the uniform-ball / single-layer
potentials behind the interaction-term decomposition.
"""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import spherical_in, spherical_kn


# ----------------------------------------------------------------------------
# Radial oracle: eps^2 (u'' + 2u'/r) - alpha^2 u = 3 inside the unit ball,
# 0 outside, [u] = 0 and [u'] = -R/eps^2 at r = R (the field P = x).
# ----------------------------------------------------------------------------


def radial_solution(eps, alpha, radius=1.0):
    k = alpha / eps
    kr = k * radius
    mat = np.array([
        [np.sinh(kr) / radius, -np.exp(-kr) / radius],
        [(kr * np.cosh(kr) - np.sinh(kr)) / radius**2,
         np.exp(-kr) * (kr + 1) / radius**2],
    ])
    a, b = np.linalg.solve(mat, np.array([3.0 / alpha**2, radius / eps**2]))

    def u(r):
        r = np.asarray(r, dtype=float)
        rs = np.where(r > 0, r, 1.0)
        inside = -3.0 / alpha**2 + a * np.sinh(k * rs) / rs
        outside = b * np.exp(-k * rs) / rs
        center = -3.0 / alpha**2 + a * k
        return np.where(r == 0, center, np.where(r < radius, inside, outside))

    def du(r):
        r = np.asarray(r, dtype=float)
        rs = np.where(r > 0, r, 1.0)
        inside = a * (k * rs * np.cosh(k * rs) - np.sinh(k * rs)) / rs**2
        outside = -b * np.exp(-k * rs) * (k * rs + 1) / rs**2
        return np.where(r < radius, inside, outside)

    return u, du


def radial_interaction_exact(eps, alpha=1.0, radius=1.0):
    """(1/2) int P . grad(u) for P = x: half of int 4 pi r^3 u'(r) dr."""
    _, du = radial_solution(eps, alpha, radius)
    val, _ = quad(lambda r: 4.0 * np.pi * r**3 * du(r), 0.0, radius)
    return 0.5 * val


# ----------------------------------------------------------------------------
# Mode-1 oracle for the tangential-splay source div P = -2 x1 (zero trace):
# u = w(r) x1/r with w in span{r, i1(kr)} inside / k1(kr) outside, w and w'
# continuous at R.  The interaction equals (4 pi / 3) int w r^3 dr.
# ----------------------------------------------------------------------------


def splay_interaction_exact(eps, alpha=1.0, radius=1.0):
    k = alpha / eps
    i1 = lambda x: spherical_in(1, x)  # noqa: E731
    k1 = lambda x: spherical_kn(1, x)  # noqa: E731
    di1 = lambda x: spherical_in(1, x, derivative=True)  # noqa: E731
    dk1 = lambda x: spherical_kn(1, x, derivative=True)  # noqa: E731
    a = 2.0 / alpha**2
    mat = np.array([[i1(k * radius), -k1(k * radius)],
                    [k * di1(k * radius), -k * dk1(k * radius)]])
    c, _ = np.linalg.solve(mat, np.array([-a * radius, -a]))
    val, _ = quad(lambda r: (a * r + c * i1(k * r)) * r**3, 0.0, radius)
    return 4.0 * np.pi / 3.0 * val


# ----------------------------------------------------------------------------
# Uniform-ball and single-layer potentials: continuum values of the three
# interaction sub-terms for the field P = x (div P = 3, trace = R).
# ----------------------------------------------------------------------------


def decomposition_exact(eps, alpha=1.0, radius=1.0):
    k = alpha / eps
    kr = k * radius
    mat = np.array([
        [np.sinh(kr) / radius, -np.exp(-kr) / radius],
        [(kr * np.cosh(kr) - np.sinh(kr)) / radius**2,
         np.exp(-kr) * (kr + 1) / radius**2],
    ])
    # kernel * indicator: jump-free, source -1 inside
    c, _ = np.linalg.solve(mat, np.array([-1.0 / alpha**2, 0.0]))
    z_in = lambda r: 1.0 / alpha**2 + c * np.sinh(k * r) / r  # noqa: E731
    term_i = 9.0 * 4.0 * np.pi * quad(lambda r: z_in(r) * r**2, 1e-12, radius)[0]

    gk = lambda d: np.exp(-k * d) / (4.0 * np.pi * eps**2 * d)  # noqa: E731
    term_ii = (radius**2 * 4.0 * np.pi * radius**2 * 2.0 * np.pi * radius**2
               * quad(lambda t: gk(2.0 * radius * np.sin(t / 2.0)) * np.sin(t),
                      1e-9, np.pi)[0])

    # single layer of unit density: zero away-from-boundary source, jump 1/eps^2
    e, _ = np.linalg.solve(mat, np.array([0.0, 1.0 / eps**2]))
    w_in = lambda r: e * np.sinh(k * r) / r  # noqa: E731
    term_iii = (-6.0 * radius * 4.0 * np.pi
                * quad(lambda r: w_in(r) * r**2, 1e-12, radius)[0])
    return term_i, term_ii, term_iii


# ----------------------------------------------------------------------------
# Shared small setups (cached across the whole session).
# ----------------------------------------------------------------------------


@pytest.fixture(scope="session")
def dom16():
    from ferrogamma.gammalab import get_setup

    return get_setup(16, level=1)


@pytest.fixture(scope="session")
def dom24():
    from ferrogamma.gammalab import get_setup

    return get_setup(24, level=2)


@pytest.fixture(scope="session")
def dom32():
    from ferrogamma.gammalab import get_setup

    return get_setup(32, level=2)


@pytest.fixture(scope="session")
def dom48():
    from ferrogamma.gammalab import get_setup

    return get_setup(48, level=3)
