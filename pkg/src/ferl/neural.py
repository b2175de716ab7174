"""Small dense feed-forward networks with exact reverse-mode gradients."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CHECKPOINT_SCHEMA = "ferl.dense_net/1"

_ACTIVATIONS = ("tanh", "relu", "identity")


def _act(name, z):
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _act_grad(name, z, a):
    if name == "tanh":
        return 1.0 - a * a
    if name == "relu":
        return (z > 0.0).astype(z.dtype)
    return np.ones_like(z)


@dataclass
class DenseNet:
    layer_sizes: list[int]
    activations: list[str]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    output_low: np.ndarray | None = None
    output_high: np.ndarray | None = None

    def __post_init__(self):
        n_layers = len(self.layer_sizes) - 1
        if n_layers < 1:
            raise ValueError("need at least an input and an output layer")
        if len(self.activations) != n_layers or len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise ValueError("one activation, weight matrix and bias vector per layer")
        for a in self.activations:
            if a not in _ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.layer_sizes[k], self.layer_sizes[k + 1]) or b.shape != (self.layer_sizes[k + 1],):
                raise ValueError(f"layer {k} parameters do not chain with layer sizes {self.layer_sizes}")
        if (self.output_low is None) != (self.output_high is None):
            raise ValueError("output_low and output_high go together")
        if self.output_low is not None:
            self.output_low = np.asarray(self.output_low, dtype=np.float64)
            self.output_high = np.asarray(self.output_high, dtype=np.float64)
            if self.activations[-1] != "tanh":
                raise ValueError("bounded outputs need a tanh output layer")

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def with_params(self, params) -> "DenseNet":
        return DenseNet(list(self.layer_sizes), list(self.activations),
                        [np.array(p) for p in params[0::2]], [np.array(p) for p in params[1::2]],
                        self.output_low, self.output_high)

    def copy(self) -> "DenseNet":
        return self.with_params(self.params())

    def to_dict(self) -> dict:
        return {
            "schema": CHECKPOINT_SCHEMA,
            "layer_sizes": list(self.layer_sizes),
            "activations": list(self.activations),
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "output_low": None if self.output_low is None else self.output_low.tolist(),
            "output_high": None if self.output_high is None else self.output_high.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DenseNet":
        if doc.get("schema") != CHECKPOINT_SCHEMA:
            raise ValueError(f"unsupported network checkpoint schema {doc.get('schema')!r}")
        sizes = doc["layer_sizes"]
        weights = [np.array(w, dtype=np.float64).reshape(sizes[k], sizes[k + 1]) for k, w in enumerate(doc["weights"])]
        biases = [np.array(b, dtype=np.float64) for b in doc["biases"]]
        return cls(sizes, doc["activations"], weights, biases, doc.get("output_low"), doc.get("output_high"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "DenseNet":
        return cls.from_dict(json.loads(Path(path).read_text()))


def init_dense(layer_sizes, activations, rng: np.random.Generator, output_low=None, output_high=None,
               final_scale: float = 1.0) -> DenseNet:
    """Uniform fan-in initialisation; ``final_scale`` shrinks the last layer."""
    weights, biases = [], []
    n_layers = len(layer_sizes) - 1
    for k in range(n_layers):
        bound = 1.0 / np.sqrt(layer_sizes[k])
        if k == n_layers - 1:
            bound *= final_scale
        weights.append(rng.uniform(-bound, bound, (layer_sizes[k], layer_sizes[k + 1])))
        biases.append(rng.uniform(-bound, bound, layer_sizes[k + 1]))
    return DenseNet(list(layer_sizes), list(activations), weights, biases, output_low, output_high)


def mlp(n_in: int, hidden: list[int], n_out: int, hidden_activation: str, rng, output_low=None, output_high=None,
        final_scale: float = 1.0) -> DenseNet:
    sizes = [n_in, *hidden, n_out]
    acts = [hidden_activation] * len(hidden) + ["tanh" if output_low is not None else "identity"]
    return init_dense(sizes, acts, rng, output_low, output_high, final_scale)


def _forward_trace(net: DenseNet, x: np.ndarray):
    pre, post = [], [x]
    a = x
    for w, b, name in zip(net.weights, net.biases, net.activations):
        z = a @ w + b
        a = _act(name, z)
        pre.append(z)
        post.append(a)
    return pre, post


def _check_input(net: DenseNet, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != net.layer_sizes[0]:
        raise ValueError(f"input has size {x.shape[-1]}, network expects {net.layer_sizes[0]}")
    return x


def forward(net: DenseNet, x) -> np.ndarray:
    """Accepts one input vector or a batch (rows)."""
    x = _check_input(net, x)
    _, post = _forward_trace(net, x)
    y = post[-1]
    if net.output_low is not None:
        y = net.output_low + (y + 1.0) * (net.output_high - net.output_low) / 2.0
    return y


def backward(net: DenseNet, x, upstream):
    """Gradients of ``sum(upstream * forward(net, x))``.

    Returns ``(param_grads, input_grad)`` with ``param_grads`` ordered like ``net.params()``.
    """
    x = _check_input(net, x)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape[-1] != net.layer_sizes[-1]:
        raise ValueError(f"upstream has size {upstream.shape[-1]}, network output is {net.layer_sizes[-1]}")
    single = x.ndim == 1
    if single:
        x, upstream = x[None], upstream[None]
    pre, post = _forward_trace(net, x)
    g = upstream
    if net.output_low is not None:
        g = g * (net.output_high - net.output_low) / 2.0
    grads: list[np.ndarray] = []
    for k in range(len(net.weights) - 1, -1, -1):
        g = g * _act_grad(net.activations[k], pre[k], post[k + 1])
        grads.append(g.sum(axis=0))
        grads.append(post[k].T @ g)
        g = g @ net.weights[k].T
    grads.reverse()
    return grads, (g[0] if single else g)


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState, ascent: bool = False):
    """Bias-corrected adaptive-moment step. Returns (new_params, new_state)."""
    if len(params) != len(grads) or any(p.shape != g.shape for p, g in zip(params, grads)):
        raise ValueError("gradients must match the parameter shapes")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient")
    m = state.m or [np.zeros_like(p) for p in params]
    v = state.v or [np.zeros_like(p) for p in params]
    t = state.step + 1
    sign = 1.0 if ascent else -1.0
    new_params, new_m, new_v = [], [], []
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for p, g, mk, vk in zip(params, grads, m, v):
        mk = state.beta1 * mk + (1.0 - state.beta1) * g
        vk = state.beta2 * vk + (1.0 - state.beta2) * g * g
        p = p + sign * state.lr * (mk / c1) / (np.sqrt(vk / c2) + state.eps)
        new_params.append(p)
        new_m.append(mk)
        new_v.append(vk)
    return new_params, AdamState(state.lr, state.beta1, state.beta2, state.eps, t, new_m, new_v)


def adam_update(net: DenseNet, grads, state: AdamState, ascent: bool = False):
    params, state = adam_step(net.params(), grads, state, ascent)
    return net.with_params(params), state


def soft_update(target, online, tau: float):
    """``(1 - tau) * target + tau * online`` for dense nets or QBM critics."""
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must lie in (0, 1]")
    if isinstance(target, DenseNet):
        if not isinstance(online, DenseNet) or target.layer_sizes != online.layer_sizes:
            raise ValueError("soft_update needs networks of identical shape")
        return target.with_params([(1.0 - tau) * t + tau * o for t, o in zip(target.params(), online.params())])
    # QBM critic: blend the coupling and bias maps key-wise
    tp, op = target.problem, online.problem
    if tp.topology != op.topology or tp.mapping != op.mapping:
        raise ValueError("soft_update needs critics with identical weight keys")
    hw = (1.0 - tau) * tp.hidden_weights + tau * op.hidden_weights
    vw = (1.0 - tau) * tp.visible_weights + tau * op.visible_weights
    return target.with_weights(hw, vw, (1.0 - tau) * target.q_offset + tau * online.q_offset)
