"""Per-target box-constrained minimization of the shape loss over q.

The box respects the sign pattern: compression bars live in [-20, -tau] and
tension bars in [tau, 20]. SLSQP (default, robust on the non-smooth p=1
objective) or L-BFGS-B (cheaper per iteration, good for warm starts and
smooth losses) supplies the box-constrained iteration; gradients come from
the adjoint of the equilibrium solve. A singular system at a probe point
returns a large finite penalty with a zero gradient, which the line search
backs away from.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import fdm
from .gradients import vjp_solve_wrt_q
from .losses import ShapeTarget, shape_loss, shape_loss_grad
from .structures import BoundaryConditions, ForceDensities, InvalidArgumentError, Topology

_SINGULAR_PENALTY = 1e12


@dataclass(frozen=True)
class OptConfig:
    max_iters: int = 5000
    tolerance: float = 1e-6
    q_abs_max: float = 20.0
    init: str = "randomized"  # "randomized" | "expert" | "warm_start"
    method: str = "slsqp"  # "slsqp" | "lbfgsb"


@dataclass
class TracePoint:
    iteration: int
    elapsed_ms: float
    loss: float
    grad_norm: float


@dataclass
class OptResult:
    q: ForceDensities
    state: "fdm.EquilibriumState"
    trace: list[TracePoint]
    best_loss: float
    singular_evals: int = 0


def box_bounds(signs: np.ndarray, tau: float, q_abs_max: float) -> list[tuple[float, float]]:
    bounds = []
    for s in signs:
        if s < 0:
            bounds.append((-q_abs_max, -tau))
        else:
            bounds.append((tau, q_abs_max))
    return bounds


def make_initializer(
    strategy: str,
    signs: np.ndarray,
    tau: float,
    q_abs_max: float = 20.0,
    seed: int | None = None,
    model=None,
    task=None,
    case=None,
) -> np.ndarray:
    """Initial q for a given strategy.

    randomized: uniform magnitude in [tau, q_abs_max] with the task signs;
    expert: unit magnitudes, clamped into the box;
    warm_start: a trained model's encoding of the target, clamped into the box.
    """
    signs = np.asarray(signs, dtype=float).ravel()
    if strategy == "randomized":
        rng = np.random.default_rng(seed)
        mag = rng.uniform(tau, q_abs_max, size=len(signs))
        return signs * mag
    if strategy == "expert":
        mag = np.clip(1.0, tau, q_abs_max)
        return signs * mag
    if strategy == "warm_start":
        if model is None or case is None:
            raise InvalidArgumentError("warm_start needs a trained model and a target")
        from .amortizer import encode

        q = encode(model, case).values
        return signs * np.clip(np.abs(q), tau, q_abs_max)
    raise InvalidArgumentError(f"unknown initialization strategy {strategy!r}")


def optimize(
    topology: Topology,
    bc: BoundaryConditions,
    target: ShapeTarget,
    signs: np.ndarray,
    tau: float,
    p: float,
    config: OptConfig | None = None,
    q0: np.ndarray | None = None,
    seed: int | None = None,
) -> OptResult:
    """Minimize the shape loss over q within the sign-respecting box.

    Returns the best iterate by loss together with a (iteration, elapsed,
    loss, gradient norm) trace. The best-so-far loss is non-increasing along
    the trace by construction.
    """
    config = config or OptConfig()
    signs = np.asarray(signs, dtype=float).ravel()
    if q0 is None:
        q0 = make_initializer(config.init, signs, tau, config.q_abs_max, seed=seed)
    q0 = signs * np.clip(np.abs(np.asarray(q0, dtype=float)), tau, config.q_abs_max)

    trace: list[TracePoint] = []
    best = {"loss": np.inf, "q": q0.copy()}
    counters = {"evals": 0, "singular": 0}
    start = time.perf_counter()

    def objective(q: np.ndarray):
        counters["evals"] += 1
        try:
            system = fdm.factorize(topology, q)
            state = fdm.solve_equilibrium(topology, q, bc, system)
        except (fdm.SingularSystemError, fdm.DegenerateGeometryError):
            counters["singular"] += 1
            return _SINGULAR_PENALTY, np.zeros_like(q)
        loss = shape_loss(state.positions, target, p)
        d_x = shape_loss_grad(state.positions, target, p)
        grad = vjp_solve_wrt_q(state, d_x[topology.free], topology, q, bc, system)
        if loss < best["loss"]:
            best["loss"] = loss
            best["q"] = q.copy()
        trace.append(
            TracePoint(
                iteration=counters["evals"],
                elapsed_ms=(time.perf_counter() - start) * 1e3,
                loss=loss,
                grad_norm=float(np.linalg.norm(grad)),
            )
        )
        return loss, grad

    if config.method == "slsqp":
        method, options = "SLSQP", {
            "maxiter": config.max_iters,
            "ftol": config.tolerance * 1e-3,
        }
    elif config.method == "lbfgsb":
        method, options = "L-BFGS-B", {
            "maxiter": config.max_iters,
            "gtol": config.tolerance,
            "ftol": config.tolerance * np.finfo(float).eps,
            "maxls": 40,
        }
    else:
        raise InvalidArgumentError(f"unknown optimization method {config.method!r}")
    result = minimize(
        objective,
        q0,
        jac=True,
        method=method,
        bounds=box_bounds(signs, tau, config.q_abs_max),
        options=options,
    )
    if not np.isfinite(best["loss"]):
        raise fdm.SingularSystemError(
            f"optimization never found a solvable iterate ({counters['singular']} singular evals)"
        )
    q_best = signs * np.clip(np.abs(best["q"]), max(tau, 1e-12), config.q_abs_max)
    q_fd = ForceDensities(values=q_best, signs=signs, shift=tau)
    state = fdm.solve_equilibrium(topology, q_fd, bc)
    return OptResult(
        q=q_fd,
        state=state,
        trace=trace,
        best_loss=float(best["loss"]),
        singular_evals=counters["singular"],
    )


def trace_to_csv(trace: list[TracePoint]) -> str:
    """CSV with columns iteration, elapsed_ms, loss, grad_norm."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["iteration", "elapsed_ms", "loss", "grad_norm"])
    for point in trace:
        writer.writerow([point.iteration, f"{point.elapsed_ms:.3f}", repr(point.loss), repr(point.grad_norm)])
    return buf.getvalue()
