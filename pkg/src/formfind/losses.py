"""Shape, physics, and regularization losses with their gradients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .structures import InvalidArgumentError


@dataclass(frozen=True)
class ShapeTarget:
    """Target node positions with a {0,1} coordinate mask.

    Masked-out coordinates contribute nothing to the shape loss. Tower tasks
    zero the x/y columns on tension-ring nodes; fixed-node rows are harmless
    either way since anchors coincide with the target boundary.
    """

    positions: np.ndarray  # (N, 3)
    mask: np.ndarray  # (N, 3) in {0, 1}

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=float)
        mask = np.ascontiguousarray(self.mask, dtype=float)
        if pos.shape != mask.shape or pos.ndim != 2 or pos.shape[1] != 3:
            raise InvalidArgumentError("positions and mask must both be (N, 3)")
        if not np.all((mask == 0.0) | (mask == 1.0)):
            raise InvalidArgumentError("mask entries must be 0 or 1")
        pos.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "mask", mask)


def shape_loss(positions: np.ndarray, target: ShapeTarget, p: float) -> float:
    """Masked elementwise l_p mismatch, summed over all nodes and axes."""
    if p <= 0:
        raise InvalidArgumentError("p must be positive")
    diff = np.asarray(positions, dtype=float) - target.positions
    return float(np.sum(target.mask * np.abs(diff) ** p))


def shape_loss_grad(positions: np.ndarray, target: ShapeTarget, p: float) -> np.ndarray:
    """Gradient of shape_loss w.r.t. positions.

    For p=1 the subgradient at a zero coordinate difference is taken as 0.
    """
    diff = np.asarray(positions, dtype=float) - target.positions
    if p == 1:
        return target.mask * np.sign(diff)
    if p == 2:
        return 2.0 * target.mask * diff
    return target.mask * p * np.abs(diff) ** (p - 1) * np.sign(diff)


def physics_loss(residuals: np.ndarray) -> float:
    """Frobenius norm of the free-node residual forces."""
    return float(np.linalg.norm(np.asarray(residuals, dtype=float)))


def physics_loss_grad(residuals: np.ndarray) -> np.ndarray:
    r = np.asarray(residuals, dtype=float)
    norm = np.linalg.norm(r)
    if norm == 0.0:
        return np.zeros_like(r)
    return r / norm


def _population_var(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    return float(np.var(values))


def regularization_loss(q_batch: np.ndarray, signs: np.ndarray) -> float:
    """Var(tensile entries) + Var(compressive entries), pooled over the batch.

    Population variance; a sign class with no entries contributes 0.
    """
    q = np.atleast_2d(np.asarray(q_batch, dtype=float))
    signs = np.asarray(signs, dtype=float).ravel()
    pos = q[:, signs > 0].ravel()
    neg = q[:, signs < 0].ravel()
    return _population_var(pos) + _population_var(neg)


def regularization_loss_grad(q_batch: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Gradient of regularization_loss w.r.t. the (B, M) batch of q values."""
    q = np.atleast_2d(np.asarray(q_batch, dtype=float))
    signs = np.asarray(signs, dtype=float).ravel()
    grad = np.zeros_like(q)
    for cls in (signs > 0, signs < 0):
        entries = q[:, cls]
        if entries.size:
            grad[:, cls] = 2.0 * (entries - entries.mean()) / entries.size
    return grad
