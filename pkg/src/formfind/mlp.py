"""Plain-numpy MLP with manual backprop, plus Adam and gradient clipping.

Layers are (weights, bias) pairs; hidden activations are ELU and the output
layer is linear (callers apply softplus heads themselves). Weights and biases
are drawn uniformly from [-1/sqrt(rho), 1/sqrt(rho)) where rho is the layer's
input size.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Params = list[tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple[int, ...]
    hidden_activation: str = "elu"
    output_activation: str = "identity"  # "softplus" or "identity"

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        if len(self.layer_sizes) < 2:
            raise ValueError("an MLP needs at least an input and an output size")
        if self.hidden_activation != "elu":
            raise ValueError(f"unsupported hidden activation {self.hidden_activation!r}")
        if self.output_activation not in ("softplus", "identity"):
            raise ValueError(f"unsupported output activation {self.output_activation!r}")

    @property
    def in_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_size(self) -> int:
        return self.layer_sizes[-1]


def elu(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, z, np.expm1(np.minimum(z, 0.0)))


def elu_grad(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, 1.0, np.exp(np.minimum(z, 0.0)))


def softplus(z: np.ndarray) -> np.ndarray:
    # log(1 + e^z), stable for large |z|
    return np.logaddexp(0.0, z)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_mlp(spec: MlpSpec, seed: int) -> Params:
    rng = np.random.default_rng(seed)
    params: Params = []
    for rho, out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        bound = 1.0 / np.sqrt(rho)
        w = rng.uniform(-bound, bound, size=(rho, out))
        b = rng.uniform(-bound, bound, size=out)
        params.append((w, b))
    return params


def mlp_forward(params: Params, x: np.ndarray, spec: MlpSpec):
    """Forward pass; x is (..., in_size). Returns (output, cache).

    The cache holds per-layer inputs and preactivations for backprop. The
    output has the spec's output activation applied; the cached final
    preactivation is available as ``cache[-1][1]``.
    """
    cache = []
    a = np.asarray(x, dtype=float)
    last = len(params) - 1
    for idx, (w, b) in enumerate(params):
        z = a @ w + b
        cache.append((a, z))
        if idx < last:
            a = elu(z)
        else:
            a = softplus(z) if spec.output_activation == "softplus" else z
    return a, cache


def mlp_backward(params: Params, cache, d_out: np.ndarray, spec: MlpSpec):
    """Backprop a cotangent on the MLP output. Returns (param grads, d_input)."""
    grads: Params = [None] * len(params)  # type: ignore[list-item]
    last = len(params) - 1
    d = np.asarray(d_out, dtype=float)
    if spec.output_activation == "softplus":
        d = d * sigmoid(cache[last][1])
    for idx in range(last, -1, -1):
        a_in, z = cache[idx]
        if idx < last:
            d = d * elu_grad(z)
        w, _ = params[idx]
        if a_in.ndim == 1:
            gw = np.outer(a_in, d)
            gb = d.copy()
        else:
            gw = a_in.T @ d
            gb = d.sum(axis=0)
        grads[idx] = (gw, gb)
        d = d @ w.T
    return grads, d


def num_parameters(params: Params) -> int:
    return sum(w.size + b.size for w, b in params)


def global_norm(grads: Params) -> float:
    total = 0.0
    for w, b in grads:
        total += float(np.sum(w * w)) + float(np.sum(b * b))
    return float(np.sqrt(total))


def clip_global_norm(grads: Params, clip: float | None) -> Params:
    """Rescale so the global norm does not exceed ``clip``; no-op otherwise."""
    if clip is None:
        return grads
    norm = global_norm(grads)
    if norm <= clip or norm == 0.0:
        return grads
    scale = clip / norm
    return [(w * scale, b * scale) for w, b in grads]


@dataclass
class AdamState:
    """First/second moment accumulators with bias-corrected updates."""

    m: Params
    v: Params
    step: int = 0

    @classmethod
    def zeros_like(cls, params: Params) -> "AdamState":
        m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in params]
        v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in params]
        return cls(m=m, v=v)


def adam_step(
    params: Params,
    grads: Params,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Params:
    state.step += 1
    t = state.step
    new_params: Params = []
    for idx, ((w, b), (gw, gb)) in enumerate(zip(params, grads)):
        mw, mb = state.m[idx]
        vw, vb = state.v[idx]
        mw = beta1 * mw + (1 - beta1) * gw
        mb = beta1 * mb + (1 - beta1) * gb
        vw = beta2 * vw + (1 - beta2) * gw**2
        vb = beta2 * vb + (1 - beta2) * gb**2
        state.m[idx] = (mw, mb)
        state.v[idx] = (vw, vb)
        c1 = 1 - beta1**t
        c2 = 1 - beta2**t
        w = w - lr * (mw / c1) / (np.sqrt(vw / c2) + eps)
        b = b - lr * (mb / c1) / (np.sqrt(vb / c2) + eps)
        new_params.append((w, b))
    return new_params
