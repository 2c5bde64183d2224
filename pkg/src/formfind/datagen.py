"""Target-shape generators: bicubic Bezier shells and cable-net towers.

Shell targets come from a 4x4 control grid centered on the origin. The four
distinct point classes on a quarter of the grid (inner corner, the two edge
midpoints, the outer corner) carry the sampling bounds; doubly symmetric
surfaces perturb one quarter and mirror it across the xz and yz planes,
asymmetric surfaces perturb all sixteen points independently.

Tower targets are three ellipses (bottom, middle, top) of radii alpha1*r and
alpha2*r rotated in plane by beta, with the reference radius r tied to the
tower height.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .structures import (
    BoundaryConditions,
    InvalidArgumentError,
    Topology,
    build_grid_shell_topology,
    build_tower_topology,
    shell_loads,
)
from .losses import ShapeTarget


# ---------------------------------------------------------------------------
# Bezier surfaces


@dataclass(frozen=True)
class BezierControlGrid:
    points: np.ndarray  # (4, 4, 3); [e, g] indexes x- and y-position
    plan_width: float

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.shape != (4, 4, 3):
            raise InvalidArgumentError("control grid must be 4x4x3")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def is_doubly_symmetric(self, tol: float = 1e-12) -> bool:
        p = self.points
        mx = p[::-1, :, :] * np.array([-1.0, 1.0, 1.0])
        my = p[:, ::-1, :] * np.array([1.0, -1.0, 1.0])
        return bool(np.allclose(p, mx, atol=tol) and np.allclose(p, my, atol=tol))


def bernstein_weights(t: float | np.ndarray) -> np.ndarray:
    """Cubic Bernstein basis evaluated at t; shape (..., 4)."""
    t = np.asarray(t, dtype=float)
    s = 1.0 - t
    return np.stack([s**3, 3 * t * s**2, 3 * t**2 * s, t**3], axis=-1)


def bezier_point(grid: BezierControlGrid, u: float, v: float) -> np.ndarray:
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise InvalidArgumentError(f"(u, v) must lie in the unit square, got {(u, v)}")
    wu = bernstein_weights(u)
    wv = bernstein_weights(v)
    return np.einsum("e,g,egc->c", wu, wv, grid.points)


def _reference_grid(w: float) -> np.ndarray:
    coords = np.array([-w / 2, -w / 6, w / 6, w / 2])
    ref = np.zeros((4, 4, 3))
    ref[:, :, 0] = coords[:, None]
    ref[:, :, 1] = coords[None, :]
    return ref


# Translation bounds per quarter class, for the quadrant with x > 0, y > 0.
# Classes: inner-inner, outer-x/inner-y, inner-x/outer-y; the outer-outer
# corner is static.
def _class_bounds(w: float) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    return {
        "inner_inner": (np.array([0.0, 0.0, w / 10]), np.array([0.0, 0.0, w])),
        "outer_inner": (np.array([-w / 2, 0.0, 0.0]), np.array([w / 2, 0.0, w / 2])),
        "inner_outer": (np.array([0.0, -w / 2, 0.0]), np.array([0.0, w / 2, 0.0])),
    }


def _point_class(e: int, g: int) -> str | None:
    x_outer = e in (0, 3)
    y_outer = g in (0, 3)
    if x_outer and y_outer:
        return None  # static corner
    if x_outer:
        return "outer_inner"
    if y_outer:
        return "inner_outer"
    return "inner_inner"


def sample_symmetric_controls(seed: int, plan_width: float = 10.0) -> BezierControlGrid:
    """Perturb the x>0, y>0 quarter of the control grid and mirror twice."""
    w = plan_width
    rng = np.random.default_rng(seed)
    bounds = _class_bounds(w)
    pts = _reference_grid(w).copy()
    for e in (2, 3):
        for g in (2, 3):
            cls = _point_class(e, g)
            if cls is None:
                continue
            lo, hi = bounds[cls]
            pts[e, g] += rng.uniform(lo, hi)
    # mirror across the yz plane (x -> -x), then across the xz plane (y -> -y)
    pts[0:2, 2:4] = pts[3:1:-1, 2:4] * np.array([-1.0, 1.0, 1.0])
    pts[:, 0:2] = pts[:, 3:1:-1] * np.array([1.0, -1.0, 1.0])
    return BezierControlGrid(points=pts, plan_width=w)


def sample_asymmetric_controls(seed: int, plan_width: float = 10.0) -> BezierControlGrid:
    """Perturb all sixteen control points independently.

    Each point uses the bounds of its quarter class, with the x/y bound
    components sign-flipped to match its quadrant; outer-corner points stay
    static.
    """
    w = plan_width
    rng = np.random.default_rng(seed)
    bounds = _class_bounds(w)
    pts = _reference_grid(w).copy()
    for e in range(4):
        for g in range(4):
            cls = _point_class(e, g)
            if cls is None:
                continue
            lo, hi = (arr.copy() for arr in bounds[cls])
            if e < 2:  # x < 0 quadrant: flip the x interval
                lo[0], hi[0] = -hi[0], -lo[0]
            if g < 2:  # y < 0 quadrant: flip the y interval
                lo[1], hi[1] = -hi[1], -lo[1]
            pts[e, g] += rng.uniform(lo, hi)
    return BezierControlGrid(points=pts, plan_width=w)


def interpolate_controls(
    sym: BezierControlGrid, asym: BezierControlGrid, delta: float
) -> BezierControlGrid:
    """Elementwise blend (1 - delta) * sym + delta * asym."""
    if not 0.0 <= delta <= 1.0:
        raise InvalidArgumentError(f"delta must lie in [0, 1], got {delta}")
    if sym.plan_width != asym.plan_width:
        raise InvalidArgumentError("plan widths differ")
    pts = (1.0 - delta) * sym.points + delta * asym.points
    return BezierControlGrid(points=pts, plan_width=sym.plan_width)


def shell_target_from_controls(
    grid: BezierControlGrid, grid_side: int, area_load: float = 0.5
) -> tuple[ShapeTarget, BoundaryConditions]:
    """Evaluate the surface on a uniform G x G (u, v) lattice, row-major.

    u follows the node column (x direction) and v the node row. Anchors are
    the evaluated perimeter points; loads lump the constant area load on the
    plan grid; the mask is all ones.
    """
    g = int(grid_side)
    if g < 2:
        raise InvalidArgumentError("grid_side must be >= 2")
    t = np.linspace(0.0, 1.0, g)
    wu = bernstein_weights(t)  # (g, 4)
    pts = np.einsum("ce,rg,egk->rck", wu, wu, grid.points)  # row r, col c
    positions = pts.reshape(g * g, 3)
    topo = build_grid_shell_topology(g)
    anchors = positions[topo.fixed]
    loads = shell_loads(topo, grid.plan_width, area_load)
    target = ShapeTarget(positions=positions, mask=np.ones_like(positions))
    return target, BoundaryConditions(anchor_positions=anchors, loads=loads)


# ---------------------------------------------------------------------------
# Cable-net towers


@dataclass(frozen=True)
class RingSpec:
    alpha1: float
    alpha2: float
    beta: float

    def __post_init__(self):
        for a in (self.alpha1, self.alpha2):
            if not 0.5 <= a < 1.5:
                raise InvalidArgumentError(f"radius scale {a} outside [1/2, 3/2)")
        if not -np.pi / 12 <= self.beta < np.pi / 12:
            raise InvalidArgumentError(f"rotation {self.beta} outside [-pi/12, pi/12)")


@dataclass(frozen=True)
class TowerParams:
    bottom: RingSpec
    middle: RingSpec
    top: RingSpec
    height: float = 10.0
    num_rings: int = 21
    points_per_ring: int = 16

    @property
    def reference_radius(self) -> float:
        return self.height / 5.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "TowerParams":
        return cls(
            bottom=RingSpec(**doc["bottom"]),
            middle=RingSpec(**doc["middle"]),
            top=RingSpec(**doc["top"]),
            height=doc.get("height", 10.0),
            num_rings=doc.get("num_rings", 21),
            points_per_ring=doc.get("points_per_ring", 16),
        )


def sample_tower_params(
    seed: int, num_rings: int = 21, points_per_ring: int = 16, height: float = 10.0
) -> TowerParams:
    rng = np.random.default_rng(seed)
    rings = []
    for _ in range(3):
        a1, a2 = rng.uniform(0.5, 1.5, size=2)
        beta = rng.uniform(-np.pi / 12, np.pi / 12)
        rings.append(RingSpec(alpha1=a1, alpha2=a2, beta=beta))
    return TowerParams(
        bottom=rings[0], middle=rings[1], top=rings[2],
        height=height, num_rings=num_rings, points_per_ring=points_per_ring,
    )


def ellipse_ring(spec: RingSpec, radius: float, z: float, k: int) -> np.ndarray:
    """k points at uniform parameter angles on a rotated ellipse at height z."""
    theta = 2.0 * np.pi * np.arange(k) / k
    x = spec.alpha1 * radius * np.cos(theta)
    y = spec.alpha2 * radius * np.sin(theta)
    c, s = np.cos(spec.beta), np.sin(spec.beta)
    return np.stack([c * x - s * y, s * x + c * y, np.full(k, float(z))], axis=1)


def tower_signs(num_rings: int, points_per_ring: int) -> np.ndarray:
    """+1 (tension) everywhere except the middle ring's circumferential bars."""
    d, k = num_rings, points_per_ring
    signs = np.ones(k * (2 * d - 1))
    mid = d // 2
    signs[mid * k : (mid + 1) * k] = -1.0
    return signs


def tower_target_from_params(
    params: TowerParams,
) -> tuple[ShapeTarget, BoundaryConditions, np.ndarray, Topology]:
    """Build the target, boundary conditions, and sign pattern for one tower.

    Rings sit at uniform heights spanning [0, h]. The middle (compression)
    ring carries a full 3D target; the remaining interior rings are tension
    rings whose target is only their plane height (x/y masked out). Bottom
    and top rings are anchors. External loads are zero: the net is
    self-stressed against its anchors.
    """
    d, k, h = params.num_rings, params.points_per_ring, params.height
    topo = build_tower_topology(d, k)
    r = params.reference_radius
    heights = np.arange(d) * h / (d - 1)
    mid = d // 2
    bottom = ellipse_ring(params.bottom, r, heights[0], k)
    top = ellipse_ring(params.top, r, heights[-1], k)
    middle = ellipse_ring(params.middle, r, heights[mid], k)
    positions = np.zeros((d * k, 3))
    mask = np.zeros((d * k, 3))
    for ring in range(d):
        rows = slice(ring * k, (ring + 1) * k)
        if ring == 0:
            positions[rows] = bottom
            mask[rows] = 1.0
        elif ring == d - 1:
            positions[rows] = top
            mask[rows] = 1.0
        elif ring == mid:
            positions[rows] = middle
            mask[rows] = 1.0
        else:
            positions[rows, 2] = heights[ring]
            mask[rows, 2] = 1.0
    anchors = np.concatenate([bottom, top], axis=0)
    bc = BoundaryConditions(anchor_positions=anchors, loads=np.zeros((d * k, 3)))
    target = ShapeTarget(positions=positions, mask=mask)
    return target, bc, tower_signs(d, k), topo


def tower_ring_input(params: TowerParams) -> np.ndarray:
    """Flattened bottom/middle/top ring coordinates, the encoder input."""
    d, k, h = params.num_rings, params.points_per_ring, params.height
    r = params.reference_radius
    heights = np.arange(d) * h / (d - 1)
    mid = d // 2
    rings = [
        ellipse_ring(params.bottom, r, heights[0], k),
        ellipse_ring(params.middle, r, heights[mid], k),
        ellipse_ring(params.top, r, heights[-1], k),
    ]
    return np.concatenate([ring.ravel() for ring in rings])


# ---------------------------------------------------------------------------
# Dataset export


def dataset_record(
    seed: int, kind: str, params: dict, target: ShapeTarget, bc: BoundaryConditions
) -> str:
    """One JSON-lines dataset record."""
    doc = {
        "seed": int(seed),
        "kind": kind,
        "params": params,
        "target": target.positions.tolist(),
        "anchors": bc.anchor_positions.tolist(),
        "loads": bc.loads.tolist(),
        "mask": target.mask.tolist(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
