"""Differentiable force-density form finding with neural amortization."""

from .structures import (
    BoundaryConditions,
    EquilibriumState,
    ForceDensities,
    InvalidArgumentError,
    Topology,
    build_grid_shell_topology,
    build_tower_topology,
    shell_loads,
)
from .fdm import (
    DegenerateGeometryError,
    SingularSystemError,
    StiffnessParts,
    assemble_stiffness,
    residual_forces,
    solve_equilibrium,
)
from .gradients import finite_difference_gradient, vjp_solve_wrt_q
from .losses import ShapeTarget, physics_loss, regularization_loss, shape_loss

__all__ = [
    "BoundaryConditions",
    "DegenerateGeometryError",
    "EquilibriumState",
    "ForceDensities",
    "InvalidArgumentError",
    "ShapeTarget",
    "SingularSystemError",
    "StiffnessParts",
    "Topology",
    "assemble_stiffness",
    "build_grid_shell_topology",
    "build_tower_topology",
    "finite_difference_gradient",
    "physics_loss",
    "regularization_loss",
    "residual_forces",
    "shape_loss",
    "shell_loads",
    "solve_equilibrium",
    "vjp_solve_wrt_q",
]
