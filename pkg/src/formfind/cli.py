"""Command-line entry point.

Subcommands: generate, train, eval, optimize, sweep-generalization,
sweep-scaling, sweep-kappa, serve. Outputs (datasets, model JSON, report
JSON, trace CSV, OBJ) are written under --out; runs are deterministic under
fixed seeds.

An optional --config JSON file supplies defaults; keys must match the
subcommand's flag names (dashes as underscores) and unknown keys are
rejected.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import amortizer, datagen, directopt, harness
from .tasks import ShellTask, TowerTask, make_task, test_seeds


def _load_config(path: str | None, parser: argparse.ArgumentParser, args) -> None:
    if path is None:
        return
    doc = json.loads(Path(path).read_text())
    valid = set(vars(args))
    unknown = set(doc) - valid
    if unknown:
        parser.error(f"unknown config keys: {sorted(unknown)}")
    for key, value in doc.items():
        setattr(args, key, value)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model_path(out: Path, task: str, kind: str) -> Path:
    return out / f"model_{task}_{kind}.json"


def _load_model(path: Path):
    if not path.exists():
        sys.exit(f"error: model file not found: {path}")
    return amortizer.model_from_json(path.read_text())


def cmd_generate(args, parser):
    task = make_task(args.task, args.scale)
    out = _out_dir(args)
    seeds = test_seeds(args.count, offset=args.seed_offset)
    lines = []
    for seed in seeds:
        if isinstance(task, ShellTask):
            case = task.sample_case(int(seed), delta=args.delta)
            kind = "shell"
        else:
            case = task.sample_case(int(seed))
            kind = "tower"
        lines.append(datagen.dataset_record(int(seed), kind, case.params, case.target, case.bc))
    path = out / f"dataset_{args.task}.jsonl"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} targets to {path}")


def cmd_train(args, parser):
    task = make_task(args.task, args.scale)
    config = amortizer.train_preset(args.task, args.kind, args.scale, seed=args.seed)
    hidden = args.hidden or (256 if args.scale == "paper" else 64)
    model, curves = amortizer.train(args.kind, task, config, kappa=args.kappa, hidden=hidden)
    out = _out_dir(args)
    path = _model_path(out, args.task, args.kind)
    path.write_text(amortizer.model_to_json(model))
    curve_path = out / f"curves_{args.task}_{args.kind}.json"
    curve_path.write_text(json.dumps(curves))
    print(f"trained {args.kind} on {args.task} ({config.total_steps} steps); model at {path}")
    print(f"final mean shape loss {curves['shape'][-1]:.4f}")


def cmd_eval(args, parser):
    task = make_task(args.task, args.scale)
    out = _out_dir(args)
    methods = {}
    for name in args.methods.split(","):
        name = name.strip()
        if name == "opt":
            methods["opt"] = "opt"
        else:
            methods[name] = _load_model(_model_path(out, args.task, name))
    report = harness.evaluation_report(
        task, methods, test_size=args.test_size,
        opt_config=directopt.OptConfig(max_iters=args.opt_iters, method=task.opt_method),
    )
    path = out / f"report_{args.task}.json"
    path.write_text(harness.report_to_json(report))
    print(f"report written to {path}")
    for name, column in report["methods"].items():
        shape, phys = column["shape"], column["physics"]
        print(
            f"{name:>6}: shape {shape['mean']:.3f} ± {shape['std']:.3f}   "
            f"physics {phys['mean']:.3e} ± {phys['std']:.3e}"
        )


def cmd_optimize(args, parser):
    task = make_task(args.task, args.scale)
    out = _out_dir(args)
    config = directopt.OptConfig(max_iters=args.opt_iters, init=args.init, method=task.opt_method)
    model = None
    if args.init == "warm_start":
        model = _load_model(_model_path(out, args.task, "ours"))
    seeds = test_seeds(args.count)
    for idx, seed in enumerate(seeds):
        case = task.sample_case(int(seed))
        q0 = directopt.make_initializer(
            args.init, task.signs, task.tau, config.q_abs_max,
            seed=args.seed + idx, model=model, task=task, case=case,
        )
        result = directopt.optimize(
            task.topology, case.bc, case.target, task.signs, task.tau, task.p,
            config=config, q0=q0,
        )
        trace_path = out / f"trace_{args.task}_{idx}.csv"
        trace_path.write_text(directopt.trace_to_csv(result.trace))
        print(f"target {idx}: best loss {result.best_loss:.4f} ({len(result.trace)} evals)")
        if args.export_obj:
            obj_path = out / f"optimized_{args.task}_{idx}.obj"
            obj_path.write_text(harness.export_obj(result.state.positions, task.topology))


def cmd_sweep_generalization(args, parser):
    task = make_task("shells", args.scale)
    out = _out_dir(args)
    deltas = [float(d) for d in args.deltas.split(",")]
    models = {}
    for name in args.methods.split(","):
        name = name.strip()
        models[name] = _load_model(_model_path(out, "shells", name))
    sweep = harness.generalization_sweep(task, models, deltas, test_size=args.test_size)
    path = out / "sweep_generalization.json"
    path.write_text(harness.report_to_json(sweep))
    print(f"sweep written to {path}")
    for point in sweep["points"]:
        parts = [f"delta={point['delta']:.2f}"]
        for name in models:
            parts.append(f"{name} shape {point[name]['shape']['mean']:.3f}")
        print("  ".join(parts))


def cmd_sweep_scaling(args, parser):
    out = _out_dir(args)
    grids = [int(g) for g in args.grids.split(",")]

    def config_fn(task):
        return amortizer.train_preset("shells", "ours", "desk", seed=args.seed)

    sweep = harness.scaling_sweep(
        grids, config_fn, hidden=args.hidden or 64, test_size=args.test_size
    )
    path = out / "sweep_scaling.json"
    path.write_text(harness.report_to_json(sweep))
    print(f"sweep written to {path}")
    for row in sweep["rows"]:
        print(
            f"G={row['grid']:>3} N={row['nodes']:>4}: shape/N {row['shape_per_node']:.4f}  "
            f"inference {row['time_ms']['mean']:.2f} ms"
        )


def cmd_sweep_kappa(args, parser):
    task = make_task(args.task, args.scale)
    out = _out_dir(args)
    kappas = [float(k) for k in args.kappas.split(",")]

    def config_fn(t):
        return amortizer.train_preset(args.task, "pinn", args.scale, seed=args.seed)

    sweep = harness.kappa_sweep(task, kappas, config_fn, hidden=args.hidden or 64,
                                test_size=args.test_size)
    best_model = sweep.pop("model")
    model_path = _model_path(out, args.task, "pinn")
    model_path.write_text(amortizer.model_to_json(best_model))
    path = out / f"sweep_kappa_{args.task}.json"
    path.write_text(harness.report_to_json(sweep))
    print(f"best kappa {sweep['best_kappa']}; model at {model_path}")


def cmd_serve(args, parser):
    import uvicorn

    from .server import create_app

    out = Path(args.out)
    models = {}
    for name in args.tasks.split(","):
        name = name.strip()
        model = _load_model(_model_path(out, name, "ours"))
        models[name] = (model, make_task(name, args.scale))
    app = create_app(models)
    uvicorn.run(app, host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formfind")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, task=True):
        if task:
            p.add_argument("--task", choices=["shells", "towers"], default="shells")
        p.add_argument("--scale", choices=["desk", "paper"], default="desk")
        p.add_argument("--out", default="artifacts")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", default=None, help="JSON config file with flag defaults")

    p = sub.add_parser("generate", help="write a JSONL dataset of target shapes")
    common(p)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seed-offset", type=int, default=10_000_000)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a model")
    common(p)
    p.add_argument("--kind", choices=["ours", "nn", "pinn"], default="ours")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--hidden", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate trained models and optimization")
    common(p)
    p.add_argument("--methods", default="ours")
    p.add_argument("--test-size", type=int, default=100)
    p.add_argument("--opt-iters", type=int, default=5000)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="direct optimization per target")
    common(p)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--init", choices=["randomized", "expert", "warm_start"], default="randomized")
    p.add_argument("--opt-iters", type=int, default=5000)
    p.add_argument("--export-obj", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep-generalization", help="loss vs interpolation factor")
    common(p, task=False)
    p.add_argument("--deltas", default="0,0.25,0.5,0.75,1")
    p.add_argument("--methods", default="ours,pinn")
    p.add_argument("--test-size", type=int, default=20)
    p.set_defaults(func=cmd_sweep_generalization)

    p = sub.add_parser("sweep-scaling", help="train and evaluate across grid sizes")
    common(p, task=False)
    p.add_argument("--grids", default="10,16,23")
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--test-size", type=int, default=20)
    p.set_defaults(func=cmd_sweep_scaling)

    p = sub.add_parser("sweep-kappa", help="physics-weight sweep for the penalized baseline")
    common(p)
    p.add_argument("--kappas", default="0.01,0.1,1,10,100")
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--test-size", type=int, default=20)
    p.set_defaults(func=cmd_sweep_kappa)

    p = sub.add_parser("serve", help="run the HTTP prediction service")
    common(p, task=False)
    p.add_argument("--tasks", default="shells")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)
    _load_config(args.config, parser, args)
    args.func(args, parser)


if __name__ == "__main__":
    main()
