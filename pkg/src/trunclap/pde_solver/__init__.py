"""Monotone wide-stencil solver for ``P+_1(D^2 u) = f`` with zero Dirichlet data."""

from .domains import Ball, GridDomain, Polytope, ball_grid, box_grid, square_grid
from .fields import GridSnapshot, ScalarField, read_binary, write_binary, write_csv
from .solver import (
    DirichletResult,
    EigenConfig,
    EigenEstimate,
    SolverConfig,
    bnv_certify_lower_bound,
    eigen_inverse_power,
    explore_negative_forcing,
    solve_dirichlet,
)
from .stencil import DirectionSet, Stencil, apply_pplus1, second_difference

__all__ = [
    "Ball",
    "DirectionSet",
    "DirichletResult",
    "EigenConfig",
    "EigenEstimate",
    "GridDomain",
    "GridSnapshot",
    "Polytope",
    "ScalarField",
    "SolverConfig",
    "Stencil",
    "apply_pplus1",
    "ball_grid",
    "bnv_certify_lower_bound",
    "box_grid",
    "eigen_inverse_power",
    "explore_negative_forcing",
    "read_binary",
    "second_difference",
    "solve_dirichlet",
    "square_grid",
    "write_binary",
    "write_csv",
]
