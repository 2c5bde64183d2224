"""Task definitions: shell and tower design problems as samplable families.

A task owns a fixed topology, the force-sign pattern, the magnitude shift,
the shape-loss exponent, and a deterministic sampler from seeds to target
cases. Desk-scale presets shrink the discretization and network width so the
full pipeline runs in CI; paper-scale presets keep the original sizes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import datagen
from .losses import ShapeTarget
from .structures import BoundaryConditions, Topology, build_grid_shell_topology


@dataclass(frozen=True)
class TargetCase:
    """One sampled design target: shape target, boundary conditions, the
    flattened encoder input, and the generating parameters."""

    target: ShapeTarget
    bc: BoundaryConditions
    encoder_input: np.ndarray
    params: dict


def _child_seeds(seed: int, n: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class ShellTask:
    """Compression-only shell matching on a square grid of Bezier targets."""

    grid_side: int = 10
    plan_width: float = 10.0
    area_load: float = 0.5
    p: float = 1.0
    tau: float = 0.0
    name: str = "shells"
    # p=1 has gradient kinks that stall quasi-Newton line searches; SQP
    # steps cope with them.
    opt_method: str = "slsqp"
    topology: Topology = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "topology", build_grid_shell_topology(self.grid_side))

    @property
    def signs(self) -> np.ndarray:
        return -np.ones(self.topology.num_bars)

    @property
    def encoder_in_size(self) -> int:
        return 3 * self.topology.num_nodes

    def case_from_controls(self, grid: datagen.BezierControlGrid, params: dict) -> TargetCase:
        target, bc = datagen.shell_target_from_controls(grid, self.grid_side, self.area_load)
        return TargetCase(
            target=target, bc=bc, encoder_input=target.positions.ravel(), params=params
        )

    def sample_case(self, seed: int, delta: float = 0.0) -> TargetCase:
        """Doubly symmetric target at delta=0, blended toward an asymmetric
        target with the same seed lineage as delta grows."""
        sym_seed, asym_seed = _child_seeds(seed, 2)
        grid = datagen.sample_symmetric_controls(sym_seed, self.plan_width)
        if delta > 0.0:
            asym = datagen.sample_asymmetric_controls(asym_seed, self.plan_width)
            grid = datagen.interpolate_controls(grid, asym, delta)
        return self.case_from_controls(grid, {"seed": int(seed), "delta": float(delta)})

    def sample_batch(self, seeds: np.ndarray, delta: float = 0.0) -> list[TargetCase]:
        return [self.sample_case(int(s), delta) for s in seeds]


@dataclass(frozen=True)
class TowerTask:
    """Cable-net tower matching: a compression ring between tension nets."""

    num_rings: int = 21
    points_per_ring: int = 16
    height: float = 10.0
    p: float = 2.0
    tau: float = 1.0
    name: str = "towers"
    opt_method: str = "lbfgsb"  # smooth p=2 loss suits quasi-Newton steps
    topology: Topology = field(init=False)

    def __post_init__(self):
        topo = datagen.tower_target_from_params(self._reference_params())[3]
        object.__setattr__(self, "topology", topo)

    def _reference_params(self) -> datagen.TowerParams:
        ring = datagen.RingSpec(alpha1=1.0, alpha2=1.0, beta=0.0)
        return datagen.TowerParams(
            bottom=ring, middle=ring, top=ring,
            height=self.height, num_rings=self.num_rings,
            points_per_ring=self.points_per_ring,
        )

    @property
    def signs(self) -> np.ndarray:
        return datagen.tower_signs(self.num_rings, self.points_per_ring)

    @property
    def encoder_in_size(self) -> int:
        return 9 * self.points_per_ring  # three rings of k points, flattened

    def case_from_params(self, params: datagen.TowerParams) -> TargetCase:
        target, bc, _, _ = datagen.tower_target_from_params(params)
        return TargetCase(
            target=target,
            bc=bc,
            encoder_input=datagen.tower_ring_input(params),
            params=params.to_dict(),
        )

    def sample_case(self, seed: int) -> TargetCase:
        params = datagen.sample_tower_params(
            seed, self.num_rings, self.points_per_ring, self.height
        )
        return self.case_from_params(params)

    def sample_batch(self, seeds: np.ndarray) -> list[TargetCase]:
        return [self.sample_case(int(s)) for s in seeds]


Task = ShellTask | TowerTask


def make_task(name: str, scale: str = "desk") -> Task:
    """Named task presets. ``desk`` shrinks sizes for fast runs; ``paper``
    keeps the original discretizations."""
    if name == "shells":
        return ShellTask(grid_side=10 if scale == "paper" else 6)
    if name == "towers":
        if scale == "paper":
            return TowerTask(num_rings=21, points_per_ring=16)
        return TowerTask(num_rings=5, points_per_ring=8)
    raise ValueError(f"unknown task {name!r}")


def test_seeds(count: int, offset: int = 10_000_000) -> np.ndarray:
    """Held-out evaluation seeds, disjoint from training's sampled seeds by
    construction (training seeds are drawn below the offset)."""
    return np.arange(offset, offset + count)
