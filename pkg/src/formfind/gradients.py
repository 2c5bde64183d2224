"""Reverse-mode gradients through the equilibrium solve, plus a
finite-difference checker.

The solve ``X_u = K_uu^{-1} (P_u - K_us X_s)`` is differentiated with the
adjoint method: one transposed solve per cotangent instead of differentiating
the factorization. Each bar touches at most a 2x2 block of K, so the
per-bar accumulation is closed form.
"""
from __future__ import annotations

import numpy as np

from .fdm import FactorizedSystem, factorize
from .structures import BoundaryConditions, EquilibriumState, ForceDensities, Topology


def vjp_solve_wrt_q(
    state: EquilibriumState,
    cotangent: np.ndarray,
    topology: Topology,
    q: ForceDensities | np.ndarray,
    bc: BoundaryConditions,
    system: FactorizedSystem | None = None,
) -> np.ndarray:
    """Pull a cotangent on the free-node positions back to the force densities.

    Solves K_uu^T lam = cotangent and accumulates, for every bar (i, j),
    -(lam_i - lam_j) . (x_i - x_j), with lam zero at fixed nodes.
    """
    if system is None:
        system = factorize(topology, q)
    w = np.asarray(cotangent, dtype=float).reshape(topology.num_free, 3)
    lam_u = system.solve_transposed(w) if topology.num_free else np.zeros((0, 3))
    lam = np.zeros((topology.num_nodes, 3))
    lam[topology.free] = lam_u
    x = state.positions
    i, j = topology.bars[:, 0], topology.bars[:, 1]
    return -np.sum((lam[i] - lam[j]) * (x[i] - x[j]), axis=1)


def vjp_residual(
    positions: np.ndarray,
    cotangent: np.ndarray,
    topology: Topology,
    q: ForceDensities | np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """VJP of the residual map at arbitrary positions.

    Returns (d_free_positions, d_q) for a cotangent on the (N_u, 3) residual
    rows. Used by baselines that penalize residuals of predicted shapes.
    """
    from .fdm import assemble_stiffness  # local import to avoid cycle at module load

    g_u = np.asarray(cotangent, dtype=float).reshape(topology.num_free, 3)
    parts = assemble_stiffness(topology, q)
    d_xu = parts.k_uu.T @ g_u
    g = np.zeros((topology.num_nodes, 3))
    g[topology.free] = g_u
    x = np.asarray(positions, dtype=float)
    i, j = topology.bars[:, 0], topology.bars[:, 1]
    d_q = np.sum((g[i] - g[j]) * (x[i] - x[j]), axis=1)
    return d_xu, d_q


def finite_difference_gradient(objective, q: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central differences (f(q + eps e_m) - f(q - eps e_m)) / (2 eps)."""
    q = np.asarray(q, dtype=float).ravel()
    grad = np.zeros_like(q)
    for m in range(len(q)):
        probe = q.copy()
        try:
            probe[m] = q[m] + eps
            hi = objective(probe)
            probe[m] = q[m] - eps
            lo = objective(probe)
        except Exception as exc:
            raise RuntimeError(f"objective failed at perturbed coordinate {m}: {exc}") from exc
        grad[m] = (hi - lo) / (2.0 * eps)
    return grad
