"""Experiment harness: evaluation reports, timing, sweeps, and exports.

Reports carry per-sample records so every aggregate is recomputable; JSON
serialization is canonical (sorted keys, compact separators) so a
serialize -> parse -> serialize round trip is byte-identical.
"""
from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass

import numpy as np

from . import amortizer, directopt, fdm
from .losses import physics_loss, shape_loss
from .structures import Topology
from .tasks import ShellTask, TargetCase, Task, TowerTask, test_seeds


def _mean_std(values) -> dict:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return {"mean": 0.0, "std": 0.0}
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def host_info() -> dict:
    return {
        "machine": platform.machine(),
        "system": platform.system(),
        "python": platform.python_version(),
    }


def evaluate_model(model, task: Task, cases: list[TargetCase]) -> dict:
    """Per-sample shape/physics losses of a model's predictions."""
    records = []
    for case in cases:
        q, state = amortizer.predict(model, task, case)
        records.append(
            {
                "shape": shape_loss(state.positions, case.target, task.p),
                "physics": physics_loss(state.residuals),
            }
        )
    return {
        "records": records,
        "shape": _mean_std([r["shape"] for r in records]),
        "physics": _mean_std([r["physics"] for r in records]),
    }


def evaluate_optimization(
    task: Task,
    cases: list[TargetCase],
    config: directopt.OptConfig | None = None,
    init: str = "randomized",
    model=None,
    seed: int = 0,
) -> dict:
    """Per-sample direct optimization, one problem per target."""
    config = config or directopt.OptConfig(init=init, method=task.opt_method)
    records = []
    for idx, case in enumerate(cases):
        q0 = directopt.make_initializer(
            init, task.signs, task.tau, config.q_abs_max,
            seed=seed + idx, model=model, task=task, case=case,
        )
        start = time.perf_counter()
        result = directopt.optimize(
            task.topology, case.bc, case.target, task.signs, task.tau, task.p,
            config=config, q0=q0,
        )
        elapsed_ms = (time.perf_counter() - start) * 1e3
        records.append(
            {
                "shape": result.best_loss,
                "physics": physics_loss(result.state.residuals),
                "time_ms": elapsed_ms,
                "evals": len(result.trace),
            }
        )
    return {
        "records": records,
        "shape": _mean_std([r["shape"] for r in records]),
        "physics": _mean_std([r["physics"] for r in records]),
        "time_ms": _mean_std([r["time_ms"] for r in records]),
    }


def measure_inference_time(model, task: Task, cases: list[TargetCase], repeats: int = 5) -> dict:
    """Steady-state per-target wall time of encode+decode.

    Median of ``repeats`` timings per target, then mean/std across targets;
    a warm-up pass per target is excluded.
    """
    per_target = []
    encode_ms = []
    for case in cases:
        amortizer.predict(model, task, case)  # warm-up, excluded
        samples = []
        for _ in range(repeats):
            start = time.perf_counter()
            amortizer.predict(model, task, case)
            samples.append((time.perf_counter() - start) * 1e3)
        per_target.append(float(np.median(samples)))
        start = time.perf_counter()
        amortizer.encode(model, case)
        encode_ms.append((time.perf_counter() - start) * 1e3)
    stats = _mean_std(per_target)
    stats["encode_ms"] = _mean_std(encode_ms)
    stats["repeats"] = repeats
    return stats


def evaluation_report(
    task: Task,
    methods: dict,
    test_size: int,
    seeds_offset: int = 10_000_000,
    opt_config: directopt.OptConfig | None = None,
    timing_repeats: int = 3,
    delta: float = 0.0,
) -> dict:
    """Side-by-side evaluation of named methods on a held-out test set.

    ``methods`` maps names to trained models, or to the string "opt" for the
    direct-optimization baseline.
    """
    seeds = test_seeds(test_size, seeds_offset)
    if isinstance(task, ShellTask):
        cases = task.sample_batch(seeds, delta=delta)
    else:
        cases = task.sample_batch(seeds)
    columns = {}
    for name, method in methods.items():
        if method == "opt":
            columns[name] = evaluate_optimization(task, cases, config=opt_config)
        else:
            columns[name] = evaluate_model(method, task, cases)
            columns[name]["time_ms"] = measure_inference_time(
                method, task, cases, repeats=timing_repeats
            )
    return {
        "task": task.name,
        "test_size": test_size,
        "seeds_offset": int(seeds_offset),
        "delta": float(delta),
        "methods": columns,
        "host": host_info(),
    }


def generalization_sweep(task: ShellTask, models: dict, deltas, test_size: int = 20) -> dict:
    """Shape/physics losses per model as targets blend from in-distribution
    (delta=0) to fully asymmetric (delta=1)."""
    seeds = test_seeds(test_size)
    points = []
    for delta in deltas:
        cases = task.sample_batch(seeds, delta=float(delta))
        row = {"delta": float(delta)}
        for name, model in models.items():
            stats = evaluate_model(model, task, cases)
            row[name] = {"shape": stats["shape"], "physics": stats["physics"]}
        points.append(row)
    return {"task": task.name, "test_size": test_size, "points": points}


def scaling_sweep(
    grids,
    train_config_fn,
    hidden: int = 64,
    test_size: int = 20,
    timing_repeats: int = 3,
) -> dict:
    """Train one model per grid size and report loss-per-node and timing."""
    rows = []
    for g in grids:
        task = ShellTask(grid_side=int(g))
        config = train_config_fn(task)
        model, _ = amortizer.train("ours", task, config, hidden=hidden)
        cases = task.sample_batch(test_seeds(test_size))
        stats = evaluate_model(model, task, cases)
        timing = measure_inference_time(model, task, cases, repeats=timing_repeats)
        n = task.topology.num_nodes
        rows.append(
            {
                "grid": int(g),
                "nodes": n,
                "bars": task.topology.num_bars,
                "shape_per_node": stats["shape"]["mean"] / n,
                "shape": stats["shape"],
                "physics": stats["physics"],
                "time_ms": timing,
            }
        )
    return {"task": "shells", "rows": rows}


def kappa_sweep(task: Task, kappas, config_fn, hidden: int = 64, test_size: int = 20) -> dict:
    """Train one physics-penalized baseline per weight and pick the one with
    the lowest unweighted (shape + physics) test loss."""
    seeds = test_seeds(test_size)
    cases = task.sample_batch(seeds)
    rows = []
    best = None
    best_model = None
    for kappa in kappas:
        model, _ = amortizer.train("pinn", task, config_fn(task), kappa=float(kappa), hidden=hidden)
        stats = evaluate_model(model, task, cases)
        combined = stats["shape"]["mean"] + stats["physics"]["mean"]
        rows.append(
            {
                "kappa": float(kappa),
                "shape": stats["shape"],
                "physics": stats["physics"],
                "combined": combined,
            }
        )
        if best is None or combined < best["combined"]:
            best = rows[-1]
            best_model = model
    return {"task": task.name, "rows": rows, "best_kappa": best["kappa"], "model": best_model}


def export_obj(positions: np.ndarray, topology: Topology) -> str:
    """Wavefront OBJ: one ``v`` line per node, one ``l`` line per bar."""
    lines = []
    for x, y, z in np.asarray(positions, dtype=float):
        lines.append(f"v {x:.9g} {y:.9g} {z:.9g}")
    for i, j in topology.bars:
        lines.append(f"l {i + 1} {j + 1}")
    return "\n".join(lines) + "\n"


def report_to_json(report: dict) -> str:
    """Canonical JSON: stable byte output for identical reports."""
    return json.dumps(report, sort_keys=True, separators=(",", ":"))


def report_from_json(text: str) -> dict:
    return json.loads(text)
