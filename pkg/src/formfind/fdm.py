"""Force density method: stiffness assembly, equilibrium solve, residuals.

The geometric stiffness matrix K(q) has diagonal entries equal to the sum of
incident force densities and off-diagonal entries -q_m for each connecting
bar. Free-node positions come from the dense direct solve
``K_uu X_u = P_u - K_us X_s``; every row of [K_uu | K_us] sums to zero by
construction.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lapack, lu_factor, lu_solve

from .structures import BoundaryConditions, EquilibriumState, ForceDensities, Topology

#: Reciprocal-condition threshold below which K_uu is declared singular.
CONDITION_LIMIT = 1e12


class SingularSystemError(RuntimeError):
    """The free-node stiffness block is singular or numerically unusable."""

    def __init__(self, message: str, condition_estimate: float = float("inf")):
        super().__init__(f"{message} (condition estimate {condition_estimate:.3e})")
        self.condition_estimate = condition_estimate


class DegenerateGeometryError(RuntimeError):
    """A solved configuration contains a zero-length bar."""


@dataclass(frozen=True)
class StiffnessParts:
    """Rows of K at the free nodes, split by free / fixed columns."""

    k_uu: np.ndarray  # (N_u, N_u)
    k_us: np.ndarray  # (N_u, N_s)


@dataclass(frozen=True)
class FactorizedSystem:
    """LU factorization of K_uu, reusable for the forward and adjoint solves."""

    parts: StiffnessParts
    lu: np.ndarray
    piv: np.ndarray
    condition_estimate: float

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve((self.lu, self.piv), rhs, check_finite=False)

    def solve_transposed(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve((self.lu, self.piv), rhs, trans=1, check_finite=False)


def q_values(q: ForceDensities | np.ndarray) -> np.ndarray:
    """Accept either a ForceDensities or a raw per-bar array."""
    if isinstance(q, ForceDensities):
        return q.values
    return np.asarray(q, dtype=float).ravel()


def assemble_stiffness(topology: Topology, q: ForceDensities | np.ndarray) -> StiffnessParts:
    """Assemble K(q) and return its free-row blocks [K_uu | K_us]."""
    qv = q_values(q)
    if len(qv) != topology.num_bars:
        raise ValueError(f"expected {topology.num_bars} force densities, got {len(qv)}")
    n = topology.num_nodes
    i, j = topology.bars[:, 0], topology.bars[:, 1]
    k = np.zeros((n, n))
    np.add.at(k, (i, i), qv)
    np.add.at(k, (j, j), qv)
    np.add.at(k, (i, j), -qv)
    np.add.at(k, (j, i), -qv)
    free, fixed = topology.free, topology.fixed
    return StiffnessParts(k_uu=k[np.ix_(free, free)], k_us=k[np.ix_(free, fixed)])


def factorize(topology: Topology, q: ForceDensities | np.ndarray) -> FactorizedSystem:
    """LU-factorize K_uu with a 1-norm condition estimate.

    Raises SingularSystemError when the factorization fails or the estimated
    condition number exceeds CONDITION_LIMIT.
    """
    parts = assemble_stiffness(topology, q)
    k_uu = parts.k_uu
    if k_uu.size == 0:
        return FactorizedSystem(parts, np.zeros((0, 0)), np.zeros(0, dtype=np.int32), 1.0)
    anorm = np.linalg.norm(k_uu, 1)
    try:
        with warnings.catch_warnings():
            # Exactly-singular probes surface as LinAlgWarning; the rcond
            # check below turns them into SingularSystemError.
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(k_uu, check_finite=False)
    except Exception as exc:  # LinAlgError from LAPACK
        raise SingularSystemError(f"LU factorization failed: {exc}") from exc
    if not np.all(np.isfinite(lu)):
        raise SingularSystemError("LU factorization produced non-finite entries")
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or rcond <= 0 or 1.0 / rcond > CONDITION_LIMIT:
        cond = float("inf") if rcond <= 0 else 1.0 / rcond
        raise SingularSystemError("stiffness block is singular or ill-conditioned", cond)
    return FactorizedSystem(parts, lu, piv, 1.0 / rcond)


def solve_positions(
    topology: Topology,
    system: FactorizedSystem,
    bc: BoundaryConditions,
) -> np.ndarray:
    """Free-node solve, returning the full (N, 3) position matrix."""
    x_s = bc.anchor_positions
    p_u = bc.loads[topology.free]
    rhs = p_u - system.parts.k_us @ x_s
    x_u = system.solve(rhs) if topology.num_free else np.zeros((0, 3))
    positions = np.zeros((topology.num_nodes, 3))
    positions[topology.fixed] = x_s
    positions[topology.free] = x_u
    return positions


def bar_lengths(topology: Topology, positions: np.ndarray) -> np.ndarray:
    deltas = positions[topology.bars[:, 1]] - positions[topology.bars[:, 0]]
    return np.linalg.norm(deltas, axis=1)


def residual_forces(
    positions: np.ndarray,
    q: ForceDensities | np.ndarray,
    bc: BoundaryConditions,
    topology: Topology,
) -> np.ndarray:
    """Residual force rows at the free nodes for arbitrary positions.

    Row i is the q-weighted sum of neighbor position differences minus the
    applied load; identically zero at a solved configuration.
    """
    parts = assemble_stiffness(topology, q)
    x = np.asarray(positions, dtype=float)
    return (
        parts.k_uu @ x[topology.free]
        + parts.k_us @ x[topology.fixed]
        - bc.loads[topology.free]
    )


def solve_equilibrium(
    topology: Topology,
    q: ForceDensities | np.ndarray,
    bc: BoundaryConditions,
    system: FactorizedSystem | None = None,
) -> EquilibriumState:
    """Solve for equilibrium positions and derived bar forces/lengths.

    Residuals are recomputed from the solved positions rather than assumed
    zero. Pass a precomputed ``system`` to reuse a factorization.
    """
    if system is None:
        system = factorize(topology, q)
    positions = solve_positions(topology, system, bc)
    lengths = bar_lengths(topology, positions)
    if np.any(lengths <= 0.0):
        raise DegenerateGeometryError("zero-length bar in the solved configuration")
    qv = q_values(q)
    forces = qv * lengths
    residuals = (
        system.parts.k_uu @ positions[topology.free]
        + system.parts.k_us @ positions[topology.fixed]
        - bc.loads[topology.free]
    )
    return EquilibriumState(
        positions=positions, forces=forces, lengths=lengths, residuals=residuals
    )
