"""Clamped-QBM Q-function: Q(s, a) is the negative free energy of the QBM with
visible units clamped to the encoded state-action pair."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .sqa import AnnealParams, SampleStats, exact_stats, sample_stats
from .sqa.rng import derive_seed
from .topology import IsingProblem

log = logging.getLogger(__name__)

CHECKPOINT_SCHEMA = "ferl.qbm_critic/1"


@dataclass
class EncodingSpec:
    """Affine map of physical values onto ``[-1, 1]`` (or plain binary codes of ±1)."""

    state_low: np.ndarray
    state_high: np.ndarray
    action_low: np.ndarray
    action_high: np.ndarray
    mode: str = "continuous"
    bits_per_dim: int = 0
    clamped_count: int = field(default=0, compare=False)

    def __post_init__(self):
        for name in ("state_low", "state_high", "action_low", "action_high"):
            setattr(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64)))
        if self.state_low.shape != self.state_high.shape or self.action_low.shape != self.action_high.shape:
            raise ValueError("bound vectors must match in shape")
        if np.any(self.state_low >= self.state_high) or np.any(self.action_low >= self.action_high):
            raise ValueError("low bounds must be strictly below high bounds")
        if self.mode not in ("continuous", "binary"):
            raise ValueError(f"unknown encoding mode {self.mode!r}")
        if self.mode == "binary" and self.bits_per_dim < 1:
            raise ValueError("binary mode needs bits_per_dim >= 1")

    @property
    def state_dim(self) -> int:
        return len(self.state_low)

    @property
    def action_dim(self) -> int:
        return len(self.action_low)

    @property
    def n_visible(self) -> int:
        per = self.bits_per_dim if self.mode == "binary" else 1
        return per * (self.state_dim + self.action_dim)

    @property
    def action_scale(self) -> np.ndarray:
        """d(encoded action) / d(physical action) in continuous mode."""
        return 2.0 / (self.action_high - self.action_low)

    def to_dict(self) -> dict:
        return {
            "state_low": self.state_low.tolist(),
            "state_high": self.state_high.tolist(),
            "action_low": self.action_low.tolist(),
            "action_high": self.action_high.tolist(),
            "mode": self.mode,
            "bits_per_dim": self.bits_per_dim,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EncodingSpec":
        return cls(**doc)


def _affine(x, low, high):
    return 2.0 * (x - low) / (high - low) - 1.0


def _binary(x, low, high, bits):
    levels = 2 ** bits
    q = np.floor((x - low) / (high - low) * levels).astype(np.int64)
    q = np.clip(q, 0, levels - 1)
    shifts = np.arange(bits - 1, -1, -1)
    code = (q[:, None] >> shifts) & 1
    return (2.0 * code - 1.0).ravel()


def encode_visible(state, action, spec: EncodingSpec) -> np.ndarray:
    """Visible vector: all state components, then all action components.

    Out-of-bounds values are clamped to the bounds and counted in ``spec.clamped_count``.
    """
    s = np.atleast_1d(np.asarray(state, dtype=np.float64))
    a = np.atleast_1d(np.asarray(action, dtype=np.float64))
    if s.shape != spec.state_low.shape or a.shape != spec.action_low.shape:
        raise ValueError(
            f"expected state dim {spec.state_dim} and action dim {spec.action_dim}, got {s.shape} and {a.shape}"
        )
    sc = np.clip(s, spec.state_low, spec.state_high)
    ac = np.clip(a, spec.action_low, spec.action_high)
    clipped = int(np.sum(sc != s) + np.sum(ac != a))
    if clipped:
        spec.clamped_count += clipped
        log.debug("clamped %d visible values to the encoding bounds", clipped)
    if spec.mode == "binary":
        return np.concatenate([
            _binary(sc, spec.state_low, spec.state_high, spec.bits_per_dim),
            _binary(ac, spec.action_low, spec.action_high, spec.bits_per_dim),
        ])
    return np.concatenate([_affine(sc, spec.state_low, spec.state_high), _affine(ac, spec.action_low, spec.action_high)])


def decode_continuous(v, spec: EncodingSpec):
    """Inverse of the continuous encoding; returns ``(state, action)``."""
    v = np.asarray(v, dtype=np.float64)
    s, a = v[: spec.state_dim], v[spec.state_dim:]
    return (
        spec.state_low + (s + 1.0) * (spec.state_high - spec.state_low) / 2.0,
        spec.action_low + (a + 1.0) * (spec.action_high - spec.action_low) / 2.0,
    )


@dataclass
class QbmCritic:
    problem: IsingProblem
    encoding: EncodingSpec
    anneal: AnnealParams
    learning_rate: float = 0.01
    discount: float = 0.9
    backend: str = "sqa"  # or "exact" for instances within the enumeration bound
    q_offset: float = 0.0  # constant added to -F; learned by TD only when learn_offset is set
    learn_offset: bool = False

    def __post_init__(self):
        if self.problem.mapping.n_visible != self.encoding.n_visible:
            raise ValueError("visible mapping and encoding disagree on the number of visible units")
        if self.backend not in ("sqa", "exact"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must lie in [0, 1]")

    @property
    def n_weights(self) -> int:
        return self.problem.n_weights

    def stats(self, visible, seed: int) -> SampleStats:
        clamped = self.problem.clamp(visible)
        if self.backend == "exact":
            return exact_stats(clamped, self.anneal.beta, self.anneal.gamma_final, self.anneal.n_replicas)
        return sample_stats(clamped, self.anneal, seed)

    def q(self, visible, seed: int) -> tuple[float, SampleStats]:
        stats = self.stats(visible, seed)
        return stats.q_value + self.q_offset, stats

    def with_weights(self, hidden_weights, visible_weights, q_offset: float | None = None) -> "QbmCritic":
        offset = self.q_offset if q_offset is None else float(q_offset)
        return replace(self, problem=self.problem.with_weights(hidden_weights, visible_weights), q_offset=offset)

    def to_dict(self) -> dict:
        return {
            "schema": CHECKPOINT_SCHEMA,
            "problem": self.problem.to_dict(),
            "encoding": self.encoding.to_dict(),
            "anneal": self.anneal.to_dict(),
            "learning_rate": self.learning_rate,
            "discount": self.discount,
            "backend": self.backend,
            "q_offset": self.q_offset,
            "learn_offset": self.learn_offset,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "QbmCritic":
        if doc.get("schema") != CHECKPOINT_SCHEMA:
            raise ValueError(f"unsupported critic checkpoint schema {doc.get('schema')!r}")
        return cls(
            problem=IsingProblem.from_dict(doc["problem"]),
            encoding=EncodingSpec.from_dict(doc["encoding"]),
            anneal=AnnealParams.from_dict(doc["anneal"]),
            learning_rate=doc["learning_rate"],
            discount=doc["discount"],
            backend=doc["backend"],
            q_offset=doc.get("q_offset", 0.0),
            learn_offset=doc.get("learn_offset", False),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "QbmCritic":
        return cls.from_dict(json.loads(Path(path).read_text()))


def init_critic(problem: IsingProblem, encoding: EncodingSpec, anneal: AnnealParams, rng: np.random.Generator,
                scale: float = 0.1, **kwargs) -> QbmCritic:
    """Critic with weights uniform in ``[-scale, scale]``."""
    hw = rng.uniform(-scale, scale, problem.topology.n_edges)
    vw = np.where(problem.mask, rng.uniform(-scale, scale, problem.mask.shape), 0.0)
    return QbmCritic(problem.with_weights(hw, vw), encoding, anneal, **kwargs)


def q_value(critic: QbmCritic, state, action, seed: int) -> tuple[float, SampleStats]:
    return critic.q(encode_visible(state, action, critic.encoding), seed)


@dataclass
class TDResult:
    critic: QbmCritic
    deltas: np.ndarray
    hidden_increment: np.ndarray
    visible_increment: np.ndarray


def td_update(critic: QbmCritic, batch: Sequence[tuple], seed: int, target: QbmCritic | None = None,
              bootstrap: Sequence[float] | None = None) -> TDResult:
    """One temporal-difference step on a mini-batch.

    ``batch`` holds ``(transition, next_action)`` pairs. Q(s', a') is evaluated on
    ``target`` (defaults to ``critic``) unless precomputed values are passed in
    ``bootstrap``. Only the statistics of the Q(s, a) evaluation feed the update;
    per-transition increments are averaged over the batch.
    """
    if len(batch) == 0:
        raise ValueError("td_update needs a non-empty batch")
    target = critic if target is None else target
    mask = critic.problem.mask
    d_hidden = np.zeros(critic.problem.topology.n_edges)
    d_visible = np.zeros(mask.shape)
    deltas = np.zeros(len(batch))
    alpha = critic.learning_rate
    for k, (tr, next_action) in enumerate(batch):
        v = encode_visible(tr.state, tr.action, critic.encoding)
        q_sa, stats = critic.q(v, derive_seed(seed, k, 0))
        if tr.done:
            delta = tr.reward - q_sa
        else:
            if bootstrap is not None:
                q_next = float(bootstrap[k])
            else:
                q_next, _ = q_value(target, tr.next_state, next_action, derive_seed(seed, k, 1))
            delta = tr.reward + critic.discount * q_next - q_sa
        deltas[k] = delta
        d_visible += alpha * delta * np.outer(v, stats.mean_h)
        d_hidden += alpha * delta * stats.mean_hh
    d_visible = np.where(mask, d_visible / len(batch), 0.0)
    d_hidden /= len(batch)
    hw = critic.problem.hidden_weights + d_hidden
    vw = critic.problem.visible_weights + d_visible
    offset = critic.q_offset + (alpha * float(deltas.mean()) if critic.learn_offset else 0.0)
    if not (np.all(np.isfinite(hw)) and np.all(np.isfinite(vw)) and np.isfinite(offset)):
        raise FloatingPointError("critic weights diverged (non-finite after update)")
    return TDResult(critic.with_weights(hw, vw, offset), deltas, d_hidden, d_visible)


def action_gradient(critic: QbmCritic, state, action, fd_step: float = 1e-2, seed: int = 0) -> np.ndarray:
    """dQ/d(encoded action) by finite differences with common random numbers.

    Central differences where the probe stays inside ``[-1, 1]``, one-sided otherwise.
    """
    if not fd_step > 0:
        raise ValueError("fd_step must be positive")
    if critic.encoding.mode != "continuous":
        raise ValueError("action gradients need the continuous encoding")
    v = encode_visible(state, action, critic.encoding)
    d_s = critic.encoding.state_dim
    grad = np.zeros(critic.encoding.action_dim)
    q0 = None
    for k in range(critic.encoding.action_dim):
        i = d_s + k
        up, down = v.copy(), v.copy()
        lo_ok = v[i] - fd_step >= -1.0
        hi_ok = v[i] + fd_step <= 1.0
        if lo_ok and hi_ok:
            up[i] += fd_step
            down[i] -= fd_step
            grad[k] = (critic.stats(up, seed).q_value - critic.stats(down, seed).q_value) / (2.0 * fd_step)
            continue
        if q0 is None:
            q0 = critic.stats(v, seed).q_value
        if hi_ok:
            up[i] += fd_step
            grad[k] = (critic.stats(up, seed).q_value - q0) / fd_step
        else:
            down[i] -= fd_step
            grad[k] = (q0 - critic.stats(down, seed).q_value) / fd_step
    return grad


def exact_action_gradient(critic: QbmCritic, state, action) -> np.ndarray:
    """Closed-form dQ/d(encoded action) under exact enumeration.

    Q = ln Z / beta and the visible field enters the effective energy as
    ``-sum_j b_j sum_l h_jl / N_r``, so dQ/dv_i = sum_j w_ij <h_j>.
    """
    if critic.encoding.mode != "continuous":
        raise ValueError("action gradients need the continuous encoding")
    v = encode_visible(state, action, critic.encoding)
    a = critic.anneal
    stats = exact_stats(critic.problem.clamp(v), a.beta, a.gamma_final, a.n_replicas)
    d_s = critic.encoding.state_dim
    return critic.problem.visible_weights[d_s:] @ stats.mean_h
