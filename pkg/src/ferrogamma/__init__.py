"""ferrogamma: screened electrostatics of polar nematics at desk scale.

Yukawa-kernel potential solves on uniform grids, the associated elastic and
electrostatic energy functionals, gradient descent on them, and executable
checks of their strong-screening asymptotics (local splay penalty plus
tangential boundary constraint).
"""

from .energies import (
    EnergyBreakdown,
    EnergyParams,
    FrankConstants,
    energy_eps,
    energy_limit,
)
from .geometry import (
    DomainBall,
    SurfaceQuadrature,
    make_ball_domain,
    make_ball_setup,
    make_icosphere_quadrature,
    normal_trace,
)
from .grid import Grid3, ScalarField, VectorField, divergence, gradient
from .kernels import backend_name
from .minimize import OptimParams, descend
from .yukawa import (
    PotentialSolution,
    SolverParams,
    kernel_mass_2d,
    kernel_mass_3d,
    solve_potential,
    yukawa_kernel,
)

__version__ = "0.1.0"
