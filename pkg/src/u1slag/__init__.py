"""Numerics for U(1)-invariant special Lagrangian 3-folds in C^3."""

from .calculus import GridField, PairField, eps_sing, residual_pair, residual_potential
from .domain import BoundaryFunction, build_grid, make_domain, unit_disc
from .errors import U1SlagError
from .solver import SolutionTriple, SolveOptions, solve, solve_continuation, solve_dirichlet_fixed_a

__version__ = "0.1.0"
