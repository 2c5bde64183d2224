"""Neural amortization of the form-finding inverse problem.

Three model kinds share one MLP encoder that maps a target shape to signed
force densities through a softplus head, ``q = s * (softplus(h) + tau)``, so
predicted densities always carry the prescribed signs with magnitudes at
least ``tau``:

* ``ours``  - the encoder's q is decoded by the equilibrium solver, so every
  prediction satisfies the force balance regardless of training state;
* ``nn``    - a learnable MLP decoder maps (q, boundary vector) to free-node
  positions and trains on the shape loss alone;
* ``pinn``  - the same architecture as ``nn`` plus a residual-norm penalty
  weighted by kappa.

Training runs Adam over freshly sampled target batches each step, with
optional global gradient-norm clipping, and is deterministic given the seed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import fdm, mlp
from .gradients import vjp_residual, vjp_solve_wrt_q
from .losses import (
    physics_loss,
    physics_loss_grad,
    regularization_loss,
    regularization_loss_grad,
    shape_loss,
    shape_loss_grad,
)
from .structures import EquilibriumState, ForceDensities, InvalidArgumentError
from .tasks import ShellTask, TargetCase, Task, TowerTask

MODEL_FORMAT_VERSION = 1

#: Training samplers draw target seeds below this bound; evaluation seeds
#: start at it, keeping the two pools disjoint.
TRAIN_SEED_BOUND = 10_000_000


@dataclass(frozen=True)
class EncoderHead:
    """Sign/shift head applied to the encoder's strictly positive output."""

    signs: np.ndarray
    shift: float

    def apply(self, positive: np.ndarray) -> np.ndarray:
        return self.signs * (positive + self.shift)


@dataclass
class AmortizerModel:
    kind: str  # "ours" | "nn" | "pinn"
    task_name: str
    encoder_spec: mlp.MlpSpec
    encoder_params: mlp.Params
    head: EncoderHead
    decoder_spec: mlp.MlpSpec | None = None
    decoder_params: mlp.Params | None = None
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TrainConfig:
    """Adam settings: ``stages`` is a schedule of (steps, learning rate)."""

    batch_size: int
    stages: tuple[tuple[int, float], ...]
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip: float | None = None
    seed: int = 0

    @property
    def total_steps(self) -> int:
        return sum(steps for steps, _ in self.stages)


def encoder_spec_for(task: Task, hidden: int = 256) -> mlp.MlpSpec:
    """Encoder layout: 2 hidden layers for shells, 4 for towers."""
    depth = 2 if isinstance(task, ShellTask) else 4
    sizes = (task.encoder_in_size, *([hidden] * depth), task.topology.num_bars)
    return mlp.MlpSpec(layer_sizes=sizes, output_activation="softplus")


def decoder_spec_for(task: Task, hidden: int = 256) -> mlp.MlpSpec:
    """Decoder layout mirrors the encoder, taking (q, boundary vector)."""
    depth = 2 if isinstance(task, ShellTask) else 4
    topo = task.topology
    in_size = topo.num_bars + 3 * topo.num_fixed + topo.num_nodes
    sizes = (in_size, *([hidden] * depth), 3 * topo.num_free)
    return mlp.MlpSpec(layer_sizes=sizes, output_activation="identity")


def build_model(kind: str, task: Task, hidden: int = 256, seed: int = 0) -> AmortizerModel:
    if kind not in ("ours", "nn", "pinn"):
        raise InvalidArgumentError(f"unknown model kind {kind!r}")
    enc_spec = encoder_spec_for(task, hidden)
    enc_seed, dec_seed = seed, seed + 1
    model = AmortizerModel(
        kind=kind,
        task_name=task.name,
        encoder_spec=enc_spec,
        encoder_params=mlp.init_mlp(enc_spec, enc_seed),
        head=EncoderHead(signs=task.signs, shift=task.tau),
        meta={"hidden": hidden, "seed": seed},
    )
    if kind in ("nn", "pinn"):
        dec_spec = decoder_spec_for(task, hidden)
        model.decoder_spec = dec_spec
        model.decoder_params = mlp.init_mlp(dec_spec, dec_seed)
    return model


def encode(model: AmortizerModel, target) -> ForceDensities:
    """Map a target (TargetCase or flattened input vector) to force densities."""
    x = target.encoder_input if isinstance(target, TargetCase) else np.asarray(target, float).ravel()
    if x.shape != (model.encoder_spec.in_size,):
        raise InvalidArgumentError(
            f"encoder expects input of size {model.encoder_spec.in_size}, got {x.shape}"
        )
    positive, _ = mlp.mlp_forward(model.encoder_params, x, model.encoder_spec)
    q = model.head.apply(positive)
    return ForceDensities(values=q, signs=model.head.signs, shift=model.head.shift)


def decode_baseline(model: AmortizerModel, q: np.ndarray, b: np.ndarray, task: Task) -> np.ndarray:
    """Learnable-decoder forward pass: (q, boundary vector) to an (N, 3) shape.

    Anchor rows are copied verbatim from the boundary vector, mirroring the
    way the simulator concatenates solved free positions with the anchors.
    """
    if model.decoder_params is None or model.decoder_spec is None:
        raise InvalidArgumentError("model has no learnable decoder")
    q = np.asarray(q, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    x_in = np.concatenate([q, b])
    if x_in.shape != (model.decoder_spec.in_size,):
        raise InvalidArgumentError(
            f"decoder expects input of size {model.decoder_spec.in_size}, got {x_in.shape}"
        )
    out, _ = mlp.mlp_forward(model.decoder_params, x_in, model.decoder_spec)
    topo = task.topology
    positions = np.zeros((topo.num_nodes, 3))
    positions[topo.fixed] = b[: 3 * topo.num_fixed].reshape(-1, 3)
    positions[topo.free] = out.reshape(-1, 3)
    return positions


def predict(model: AmortizerModel, task: Task, case: TargetCase):
    """Encode a target and decode it to a shape.

    For ``ours`` the decoder is the equilibrium solver, so the returned state
    satisfies the force balance by construction. Baselines return their
    decoder's shape with residuals evaluated at it.
    """
    q = encode(model, case)
    if model.kind == "ours":
        state = fdm.solve_equilibrium(task.topology, q, case.bc)
        return q, state
    positions = decode_baseline(model, q.values, case.bc.flat_vector(), task)
    lengths = fdm.bar_lengths(task.topology, positions)
    residuals = fdm.residual_forces(positions, q, case.bc, task.topology)
    state = EquilibriumState(
        positions=positions, forces=q.values * lengths, lengths=lengths, residuals=residuals
    )
    return q, state


# ---------------------------------------------------------------------------
# Training


def _sample_cases(task: Task, rng: np.random.Generator, count: int) -> list[TargetCase]:
    seeds = rng.integers(0, TRAIN_SEED_BOUND, size=count)
    return task.sample_batch(seeds)


def _reg_weight(task: Task) -> float:
    # Towers regularize the spread of the stiffness distribution; shells don't.
    return 10.0 if isinstance(task, TowerTask) else 0.0


def train(
    kind: str,
    task: Task,
    config: TrainConfig,
    kappa: float = 1.0,
    hidden: int = 256,
) -> tuple[AmortizerModel, dict]:
    """Train a model of the given kind on freshly sampled batches.

    Returns the model and per-step loss curves {"shape", "physics", "reg"}.
    Raises RuntimeError with the step index if the loss turns non-finite.
    """
    model = build_model(kind, task, hidden=hidden, seed=config.seed)
    rng = np.random.default_rng(config.seed)
    lam = _reg_weight(task)

    params = list(model.encoder_params)
    n_enc = len(params)
    if model.decoder_params is not None:
        params = params + list(model.decoder_params)
    opt = mlp.AdamState.zeros_like(params)

    curves = {"shape": [], "physics": [], "reg": []}
    step = 0
    for steps, lr in config.stages:
        for _ in range(steps):
            enc_params = params[:n_enc]
            dec_params = params[n_enc:]
            cases = _sample_cases(task, rng, config.batch_size)
            batch_in = np.stack([c.encoder_input for c in cases])
            positive, enc_cache = mlp.mlp_forward(enc_params, batch_in, model.encoder_spec)
            q_batch = model.head.signs * (positive + model.head.shift)

            b_size = len(cases)
            d_q = np.zeros_like(q_batch)
            shape_total = 0.0
            physics_total = 0.0

            if kind == "ours":
                for idx, case in enumerate(cases):
                    system = fdm.factorize(task.topology, q_batch[idx])
                    state = fdm.solve_equilibrium(task.topology, q_batch[idx], case.bc, system)
                    shape_total += shape_loss(state.positions, case.target, task.p)
                    physics_total += physics_loss(state.residuals)
                    d_x = shape_loss_grad(state.positions, case.target, task.p)
                    d_q[idx] = vjp_solve_wrt_q(
                        state, d_x[task.topology.free], task.topology,
                        q_batch[idx], case.bc, system,
                    ) / b_size
                dec_grads = []
            else:
                b_vecs = np.stack([c.bc.flat_vector() for c in cases])
                dec_in = np.concatenate([q_batch, b_vecs], axis=1)
                out, dec_cache = mlp.mlp_forward(dec_params, dec_in, model.decoder_spec)
                d_out = np.zeros_like(out)
                topo = task.topology
                for idx, case in enumerate(cases):
                    positions = np.zeros((topo.num_nodes, 3))
                    positions[topo.fixed] = case.bc.anchor_positions
                    positions[topo.free] = out[idx].reshape(-1, 3)
                    shape_total += shape_loss(positions, case.target, task.p)
                    d_x = shape_loss_grad(positions, case.target, task.p)
                    d_xu = d_x[topo.free]
                    if kind == "pinn":
                        residuals = fdm.residual_forces(positions, q_batch[idx], case.bc, topo)
                        l_phys = physics_loss(residuals)
                        physics_total += l_phys
                        d_r = physics_loss_grad(residuals) * (kappa / b_size)
                        d_xu_phys, d_q_phys = vjp_residual(positions, d_r, topo, q_batch[idx])
                        d_xu = d_xu / b_size + d_xu_phys
                        d_q[idx] += d_q_phys
                    else:
                        d_xu = d_xu / b_size
                    d_out[idx] = d_xu.ravel()
                dec_grads, d_dec_in = mlp.mlp_backward(dec_params, dec_cache, d_out, model.decoder_spec)
                d_q += d_dec_in[:, : task.topology.num_bars]

            reg = 0.0
            if lam > 0.0:
                reg = regularization_loss(q_batch, model.head.signs)
                d_q += lam * regularization_loss_grad(q_batch, model.head.signs)

            # back through the head: q = s * (positive + tau)
            d_positive = d_q * model.head.signs
            enc_grads, _ = mlp.mlp_backward(enc_params, enc_cache, d_positive, model.encoder_spec)

            grads = enc_grads + dec_grads
            grads = mlp.clip_global_norm(grads, config.clip)
            params = mlp.adam_step(
                params, grads, opt, lr,
                beta1=config.beta1, beta2=config.beta2, eps=config.eps,
            )

            mean_shape = shape_total / b_size
            mean_phys = physics_total / b_size
            if not np.isfinite(mean_shape + mean_phys + reg):
                raise RuntimeError(
                    f"non-finite loss at step {step}: "
                    f"shape={mean_shape} physics={mean_phys} reg={reg}"
                )
            curves["shape"].append(mean_shape)
            curves["physics"].append(mean_phys)
            curves["reg"].append(reg)
            step += 1

    model.encoder_params = params[:n_enc]
    if model.decoder_params is not None:
        model.decoder_params = params[n_enc:]
    model.meta.update(
        {
            "trained_steps": step,
            "kappa": kappa,
            "reg_weight": lam,
            "train_seed": config.seed,
        }
    )
    return model, curves


# ---------------------------------------------------------------------------
# Training presets


def train_preset(task_name: str, kind: str, scale: str = "desk", seed: int = 0) -> TrainConfig:
    """Named training configurations per task, model kind, and scale."""
    key = (task_name, kind, scale)
    if task_name == "shells":
        if scale == "paper":
            lr = 5e-5 if kind == "ours" else 3e-5
            return TrainConfig(batch_size=64, stages=((10_000, lr),), seed=seed)
        # desk scale: shorter schedules with larger steps
        if kind == "ours":
            return TrainConfig(
                batch_size=32, stages=((2500, 1e-3), (1500, 2e-4), (1000, 5e-5)), seed=seed
            )
        return TrainConfig(batch_size=32, stages=((1200, 1e-3), (800, 2e-4)), seed=seed)
    if task_name == "towers":
        if scale == "paper":
            if kind == "ours":
                return TrainConfig(
                    batch_size=16, stages=((5000, 1e-3), (5000, 1e-4)), clip=0.01, seed=seed
                )
            return TrainConfig(batch_size=16, stages=((10_000, 1e-3),), clip=0.01, seed=seed)
        if kind == "ours":
            return TrainConfig(
                batch_size=16, stages=((900, 1e-3), (600, 1e-4)), clip=0.01, seed=seed
            )
        return TrainConfig(batch_size=16, stages=((1500, 1e-3),), clip=0.01, seed=seed)
    raise InvalidArgumentError(f"no preset for {key}")


# ---------------------------------------------------------------------------
# Persistence


def _params_to_doc(params: mlp.Params) -> list[dict]:
    return [{"w": w.tolist(), "b": b.tolist()} for w, b in params]


def _params_from_doc(doc: list[dict]) -> mlp.Params:
    return [(np.asarray(layer["w"], float), np.asarray(layer["b"], float)) for layer in doc]


def model_to_json(model: AmortizerModel) -> str:
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "task": model.task_name,
        "spec": {
            "layer_sizes": list(model.encoder_spec.layer_sizes),
            "hidden_activation": model.encoder_spec.hidden_activation,
            "output_activation": model.encoder_spec.output_activation,
        },
        "signs": model.head.signs.tolist(),
        "shift": model.head.shift,
        "layers": _params_to_doc(model.encoder_params),
        "meta": dict(model.meta),
    }
    if model.decoder_spec is not None:
        doc["meta"]["decoder_spec"] = {
            "layer_sizes": list(model.decoder_spec.layer_sizes),
            "hidden_activation": model.decoder_spec.hidden_activation,
            "output_activation": model.decoder_spec.output_activation,
        }
        doc["meta"]["decoder_layers"] = _params_to_doc(model.decoder_params)
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def model_from_json(text: str) -> AmortizerModel:
    doc = json.loads(text)
    version = doc.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise InvalidArgumentError(f"unsupported model format version {version!r}")
    meta = dict(doc["meta"])
    dec_spec = dec_params = None
    if "decoder_spec" in meta:
        spec_doc = meta.pop("decoder_spec")
        dec_spec = mlp.MlpSpec(
            layer_sizes=tuple(spec_doc["layer_sizes"]),
            hidden_activation=spec_doc["hidden_activation"],
            output_activation=spec_doc["output_activation"],
        )
        dec_params = _params_from_doc(meta.pop("decoder_layers"))
    return AmortizerModel(
        kind=doc["kind"],
        task_name=doc["task"],
        encoder_spec=mlp.MlpSpec(
            layer_sizes=tuple(doc["spec"]["layer_sizes"]),
            hidden_activation=doc["spec"]["hidden_activation"],
            output_activation=doc["spec"]["output_activation"],
        ),
        encoder_params=_params_from_doc(doc["layers"]),
        head=EncoderHead(signs=np.asarray(doc["signs"], float), shift=float(doc["shift"])),
        decoder_spec=dec_spec,
        decoder_params=dec_params,
        meta=meta,
    )
