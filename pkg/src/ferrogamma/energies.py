"""Energy functionals: elastic terms, Ginzburg-Landau penalty, screened
electrostatics, and the strong-screening limit energy.

Two families are implemented.  At finite screening the energy is the Frank
term plus the electrostatic interaction (1/2) int_Omega P . grad(u), with u
the screened potential of P; an optional Ginzburg-Landau penalty relaxes the
unit-length constraint.  In the limit the interaction collapses to the local
splay penalty (1/(2*alpha^2)) (div P)^2 plus a hard tangency constraint at
the boundary, represented here by an infinite-energy marker carrying the
measured boundary norm.

The electrostatic interaction also comes with its double-integral
decomposition: volume-volume (I), surface-surface (II) and the mixed cross
term (III), which sum to twice the interaction energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConstraintViolationError, DegenerateInputError, InvalidFieldError
from .geometry import DomainBall, normal_trace
from .grid import VectorField, curl, diff, divergence
from .yukawa import (
    PotentialSolution,
    SolverParams,
    disk_average_kernel,
    fft_apply,
    solve_potential,
)

TANGENCY_TOL_FACTOR = 1e-3
UNIT_LENGTH_TOL = 1e-6


@dataclass(frozen=True)
class FrankConstants:
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3) <= 0:
            raise InvalidFieldError("Frank constants must all be positive")


@dataclass(frozen=True)
class EnergyParams:
    solver: SolverParams
    eta: float = 0.3
    frank: FrankConstants = field(default_factory=FrankConstants)

    def __post_init__(self):
        if self.eta <= 0:
            raise InvalidFieldError(f"eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Every named term of one energy evaluation.

    `total` is the value of the energy that was evaluated; `infinite` marks
    the limit energy's non-tangential branch (total = inf, with the measured
    boundary norm kept for scaling experiments).
    """

    frank: float
    gl: float
    electro_interaction: float
    electro_field: float
    term_I: float
    term_II: float
    term_III: float
    splay_limit: float
    boundary_norm_sq: float
    total: float
    infinite: bool = False


def _require_finite(P: VectorField) -> None:
    if not np.isfinite(P.components).all():
        raise DegenerateInputError("field contains non-finite values")


def _require_unit_length(P: VectorField, dom: DomainBall) -> None:
    norms = np.sqrt(P.norm2()[dom.indicator > 0])
    worst = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
    if worst > UNIT_LENGTH_TOL:
        raise ConstraintViolationError(
            f"constrained mode requires |P| = 1 on the domain "
            f"(max deviation {worst:.2e})"
        )


def frank_equal_constants(P: VectorField, dom: DomainBall) -> float:
    """(1/2) int_Omega |grad P|^2 with the difference stencil per component."""
    h = P.grid.spacing
    total = np.zeros(P.grid.dims)
    for c in range(3):
        for ax in range(3):
            total += diff(P.components[c], ax, h) ** 2
    return 0.5 * float(np.sum(dom.cell_measure * total))


def frank_general(P: VectorField, dom: DomainBall, k: FrankConstants) -> float:
    """(1/2) int K1 (div P)^2 + K2 (curl P . P)^2 + K3 |curl P x P|^2."""
    div_p = divergence(P).values
    c = curl(P).components
    p = P.components
    twist = np.einsum("cijk,cijk->ijk", c, p)
    cross = np.cross(np.moveaxis(c, 0, -1), np.moveaxis(p, 0, -1))
    bend = np.einsum("ijkc,ijkc->ijk", cross, cross)
    dens = k.k1 * div_p**2 + k.k2 * twist**2 + k.k3 * bend
    return 0.5 * float(np.sum(dom.cell_measure * dens))


def gl_penalty(P: VectorField, dom: DomainBall, eta: float) -> float:
    """int (1/(4 eta^2)) (|P|^2 - 1)^2 over the ball."""
    if eta <= 0:
        raise InvalidFieldError(f"eta must be positive, got {eta}")
    dens = (P.norm2() - 1.0) ** 2
    return float(np.sum(dom.cell_measure * dens)) / (4.0 * eta**2)


def splay_energy(P: VectorField, dom: DomainBall, alpha: float) -> float:
    """(1/(2 alpha^2)) int (div P)^2: the local limit of the interaction."""
    div_p = divergence(P).values
    return float(np.sum(dom.cell_measure * div_p**2)) / (2.0 * alpha**2)


def boundary_norm_sq(P: VectorField, dom: DomainBall) -> float:
    """int_boundary (P . nu)^2 dS by the surface quadrature."""
    trace = normal_trace(P, dom.surface)
    return float(np.sum(dom.surface.weights * trace**2))


def electrostatic_field_energy(sol: PotentialSolution) -> float:
    """(1/2) int eps^2 |grad u|^2 + alpha^2 u^2 over the padded grid."""
    params = sol.params
    h3 = sol.u.grid.cell_volume
    g2 = np.einsum("cijk,cijk->", sol.grad_u.components, sol.grad_u.components)
    return 0.5 * h3 * float(params.eps**2 * g2 + params.alpha**2 * np.sum(sol.u.values**2))


def interaction_energy(P: VectorField, sol: PotentialSolution,
                       dom: DomainBall) -> float:
    """(1/2) int_Omega P . grad(u) with the solution restricted to the ball."""
    sl = sol.domain_slice()
    grad_dom = sol.grad_u.components[(slice(None),) + sl]
    dot = np.einsum("cijk,cijk->ijk", P.components, grad_dom)
    return 0.5 * float(np.sum(dom.cell_measure * dot))


def term_decomposition(P: VectorField, dom: DomainBall,
                       params: SolverParams) -> tuple[float, float, float]:
    """The three double integrals behind the interaction energy:

    I   volume-volume   (div P against div P),
    II  surface-surface ((P.nu) against (P.nu), disk-corrected diagonal),
    III mixed cross term (-2 x volume convolution sampled at the nodes).

    They satisfy I + II + III = 2 * interaction energy up to discretization.
    """
    div_p = divergence(P).values
    conv = fft_apply(div_p * dom.indicator, dom.grid, params, 0)
    measure = dom.cell_measure
    term_i = float(np.sum(measure * div_p * conv))

    surf = dom.surface
    trace = normal_trace(P, surf)
    diag = disk_average_kernel(params, surf.weights)
    rows = kernels.pair_rows(surf.nodes, surf.weights * trace, diag,
                             params.eps, params.alpha)
    term_ii = float(np.sum(surf.weights * trace * rows))

    conv_nodes = kernels.trilinear_gather(dom.grid, conv, surf.nodes)
    term_iii = -2.0 * float(np.sum(surf.weights * trace * conv_nodes))
    return term_i, term_ii, term_iii


def energy_eps(P: VectorField, dom: DomainBall, params: EnergyParams,
               constrained: bool = False) -> EnergyBreakdown:
    """Full screened-energy breakdown at finite screening.

    constrained=True evaluates the hard unit-length energy (no GL term) and
    rejects fields violating |P| = 1 on the ball.
    """
    _require_finite(P)
    if constrained:
        _require_unit_length(P, dom)
    frank = frank_equal_constants(P, dom)
    gl = 0.0 if constrained else gl_penalty(P, dom, params.eta)
    sol = solve_potential(P, dom, params.solver)
    interaction = interaction_energy(P, sol, dom)
    field_energy = electrostatic_field_energy(sol)
    term_i, term_ii, term_iii = term_decomposition(P, dom, params.solver)
    bns = boundary_norm_sq(P, dom)
    total = frank + gl + interaction
    return EnergyBreakdown(
        frank=frank, gl=gl,
        electro_interaction=interaction, electro_field=field_energy,
        term_I=term_i, term_II=term_ii, term_III=term_iii,
        splay_limit=splay_energy(P, dom, params.solver.alpha),
        boundary_norm_sq=bns, total=total,
    )


def tangency_tolerance(P: VectorField, dom: DomainBall) -> float:
    """Threshold on int (P.nu)^2 dS below which a discrete field counts as
    tangential: 1e-3 * (sphere area) * max(1, mean |P|^2)."""
    area = 4.0 * np.pi * dom.radius**2
    vol = dom.volume()
    mean_p2 = float(np.sum(dom.cell_measure * P.norm2())) / vol if vol > 0 else 0.0
    return TANGENCY_TOL_FACTOR * area * max(1.0, mean_p2)


def energy_limit(P: VectorField, dom: DomainBall, params: EnergyParams,
                 constrained: bool = False,
                 general_frank: bool = False) -> EnergyBreakdown:
    """Limit-energy breakdown: Frank + splay penalty under tangency, or the
    infinite marker (with the measured boundary norm) when P . nu does not
    vanish.  general_frank=True uses the three-constant elastic energy
    instead of the equal-constants form."""
    _require_finite(P)
    if constrained:
        _require_unit_length(P, dom)
    if general_frank:
        frank = frank_general(P, dom, params.frank)
    else:
        frank = frank_equal_constants(P, dom)
    gl = 0.0 if constrained else gl_penalty(P, dom, params.eta)
    splay = splay_energy(P, dom, params.solver.alpha)
    bns = boundary_norm_sq(P, dom)
    infinite = bns > tangency_tolerance(P, dom)
    total = math.inf if infinite else frank + gl + splay
    return EnergyBreakdown(
        frank=frank, gl=gl,
        electro_interaction=0.0, electro_field=0.0,
        term_I=0.0, term_II=0.0, term_III=0.0,
        splay_limit=splay, boundary_norm_sq=bns,
        total=total, infinite=infinite,
    )
