"""Bar-system topologies, boundary conditions, and task structures.

A structure is a pin-jointed bar network: ``N`` nodes joined by ``M``
axial-only bars, split into anchored (fixed) and free nodes. Node and bar
orderings are part of the contract here because force-density vectors and
sign patterns are indexed by bar position.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class InvalidArgumentError(ValueError):
    """Raised when a constructor or operation receives out-of-contract input."""


@dataclass(frozen=True)
class Topology:
    """Node/bar incidence with a fixed/free partition.

    ``bars`` is an (M, 2) int array of node index pairs; ``fixed`` and
    ``free`` are ordered index arrays partitioning ``range(num_nodes)``.
    """

    num_nodes: int
    bars: np.ndarray
    fixed: np.ndarray
    free: np.ndarray

    def __post_init__(self):
        bars = np.asarray(self.bars, dtype=np.intp).reshape(-1, 2)
        fixed = np.asarray(self.fixed, dtype=np.intp).ravel()
        free = np.asarray(self.free, dtype=np.intp).ravel()
        object.__setattr__(self, "bars", bars)
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "free", free)
        n = self.num_nodes
        if n < 1:
            raise InvalidArgumentError("num_nodes must be positive")
        both = np.concatenate([fixed, free])
        if len(both) != n or not np.array_equal(np.sort(both), np.arange(n)):
            raise InvalidArgumentError("fixed/free must partition node indices")
        if bars.size:
            if bars.min() < 0 or bars.max() >= n:
                raise InvalidArgumentError("bar references an invalid node index")
        if np.any(bars[:, 0] == bars[:, 1]):
            raise InvalidArgumentError("bar joins a node to itself")
        key = np.sort(bars, axis=1)
        if len(np.unique(key, axis=0)) != len(bars):
            raise InvalidArgumentError("duplicate bar (unordered pair)")
        incident = np.zeros(n, dtype=bool)
        incident[bars.ravel()] = True
        if not incident[free].all():
            raise InvalidArgumentError("a free node has no incident bar")
        bars.setflags(write=False)
        fixed.setflags(write=False)
        free.setflags(write=False)

    @property
    def num_bars(self) -> int:
        return len(self.bars)

    @property
    def num_fixed(self) -> int:
        return len(self.fixed)

    @property
    def num_free(self) -> int:
        return len(self.free)


@dataclass(frozen=True)
class BoundaryConditions:
    """Anchor positions (one row per fixed node, in ``Topology.fixed`` order)
    and nodal loads (one row per node)."""

    anchor_positions: np.ndarray
    loads: np.ndarray

    def __post_init__(self):
        anchors = np.ascontiguousarray(self.anchor_positions, dtype=float)
        loads = np.ascontiguousarray(self.loads, dtype=float)
        if anchors.ndim != 2 or anchors.shape[1] != 3:
            raise InvalidArgumentError("anchor_positions must be (N_s, 3)")
        if loads.ndim != 2 or loads.shape[1] != 3:
            raise InvalidArgumentError("loads must be (N, 3)")
        anchors.setflags(write=False)
        loads.setflags(write=False)
        object.__setattr__(self, "anchor_positions", anchors)
        object.__setattr__(self, "loads", loads)

    def flat_vector(self) -> np.ndarray:
        """Flattened anchors followed by the vertical load components.

        Length is 3*N_s + N; this is the conditioning vector consumed by the
        learnable decoder baselines.
        """
        return np.concatenate([self.anchor_positions.ravel(), self.loads[:, 2]])


@dataclass(frozen=True)
class ForceDensities:
    """Signed per-bar stiffness vector with its sign pattern and magnitude shift.

    Invariants: ``sign(values[m]) == signs[m]`` and ``abs(values[m]) >= shift``.
    """

    values: np.ndarray
    signs: np.ndarray
    shift: float = 0.0

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float).ravel()
        signs = np.asarray(self.signs, dtype=float).ravel()
        if values.shape != signs.shape:
            raise InvalidArgumentError("values and signs must have equal length")
        if not np.all(np.abs(signs) == 1.0):
            raise InvalidArgumentError("signs must be -1 or +1")
        if self.shift < 0:
            raise InvalidArgumentError("shift must be non-negative")
        if not np.all(np.sign(values) == signs):
            raise InvalidArgumentError("value signs disagree with the sign pattern")
        if not np.all(np.abs(values) >= self.shift):
            raise InvalidArgumentError("a magnitude falls below the shift")
        values.setflags(write=False)
        signs.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "signs", signs)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class EquilibriumState:
    """Solved node positions plus derived bar quantities and residuals."""

    positions: np.ndarray  # (N, 3)
    forces: np.ndarray  # (M,), forces[m] = q[m] * lengths[m]
    lengths: np.ndarray  # (M,), strictly positive
    residuals: np.ndarray  # (N_u, 3)

    def __post_init__(self):
        for name in ("positions", "forces", "lengths", "residuals"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.lengths <= 0):
            raise InvalidArgumentError("bar lengths must be strictly positive")


def build_grid_shell_topology(grid_side: int) -> Topology:
    """Square grid of side G: N = G^2 nodes in row-major order, bars between
    orthogonal neighbors (all x-direction bars first, then y-direction), and
    the full perimeter fixed."""
    g = int(grid_side)
    if g < 2:
        raise InvalidArgumentError(f"grid_side must be >= 2, got {grid_side}")
    n = g * g
    idx = np.arange(n).reshape(g, g)
    horizontal = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    vertical = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    bars = np.concatenate([horizontal, vertical], axis=0)
    rows, cols = np.divmod(np.arange(n), g)
    on_perimeter = (rows == 0) | (rows == g - 1) | (cols == 0) | (cols == g - 1)
    fixed = np.flatnonzero(on_perimeter)
    free = np.flatnonzero(~on_perimeter)
    return Topology(num_nodes=n, bars=bars, fixed=fixed, free=free)


def build_tower_topology(num_rings: int, points_per_ring: int) -> Topology:
    """Stack of D rings of k nodes each, ring-major bottom to top.

    Bars: circumferential bars ring by ring (D*k), then vertical bars between
    consecutive rings (k*(D-1)). Bottom and top rings are fixed.
    """
    d, k = int(num_rings), int(points_per_ring)
    if d < 2 or k < 3:
        raise InvalidArgumentError(f"need num_rings >= 2 and points_per_ring >= 3, got {d}, {k}")
    n = d * k
    idx = np.arange(n).reshape(d, k)
    ring_bars = np.stack([idx.ravel(), np.roll(idx, -1, axis=1).ravel()], axis=1)
    vertical = np.stack([idx[:-1].ravel(), idx[1:].ravel()], axis=1)
    bars = np.concatenate([ring_bars, vertical], axis=0)
    fixed = np.concatenate([idx[0], idx[-1]])
    free = idx[1:-1].ravel()
    return Topology(num_nodes=n, bars=bars, fixed=fixed, free=free)


def shell_loads(topology: Topology, plan_width: float, area_load: float) -> np.ndarray:
    """Vertical nodal loads from lumping a constant plan area load.

    Tributary areas are measured on the undeformed plan grid of width
    ``plan_width``: full cell area for interior nodes, half on edges, a
    quarter on corners. Totals conserve ``-area_load * plan_width**2``.
    """
    n = topology.num_nodes
    g = int(round(np.sqrt(n)))
    if g * g != n:
        raise InvalidArgumentError("shell_loads expects a square-grid topology")
    cell = (plan_width / (g - 1)) ** 2
    rows, cols = np.divmod(np.arange(n), g)
    frac_r = np.where((rows == 0) | (rows == g - 1), 0.5, 1.0)
    frac_c = np.where((cols == 0) | (cols == g - 1), 0.5, 1.0)
    loads = np.zeros((n, 3))
    loads[:, 2] = -area_load * cell * frac_r * frac_c
    return loads


def structure_to_json(
    topology: Topology, positions: np.ndarray, loads: np.ndarray
) -> str:
    """Serialize a structure to the documented JSON schema:
    {"nodes": [[x,y,z]...], "bars": [[i,j]...], "fixed": [i...], "loads": [[x,y,z]...]}
    """
    doc = {
        "nodes": np.asarray(positions, dtype=float).tolist(),
        "bars": topology.bars.tolist(),
        "fixed": topology.fixed.tolist(),
        "loads": np.asarray(loads, dtype=float).tolist(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def structure_from_json(text: str) -> tuple[Topology, np.ndarray, np.ndarray]:
    """Parse the JSON schema back into (topology, node positions, loads)."""
    doc = json.loads(text)
    missing = {"nodes", "bars", "fixed", "loads"} - doc.keys()
    if missing:
        raise InvalidArgumentError(f"missing keys in structure JSON: {sorted(missing)}")
    nodes = np.asarray(doc["nodes"], dtype=float)
    n = len(nodes)
    fixed = np.asarray(doc["fixed"], dtype=np.intp)
    free = np.setdiff1d(np.arange(n), fixed)
    topo = Topology(num_nodes=n, bars=np.asarray(doc["bars"]), fixed=fixed, free=free)
    return topo, nodes, np.asarray(doc["loads"], dtype=float)
