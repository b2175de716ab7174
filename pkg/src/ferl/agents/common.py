"""Shared training plumbing: transitions, replay, configs, logs, exploration."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..sqa import AnnealParams
from ..topology import bipartite_graph, build_chimera

CONFIG_SCHEMA = "ferl.train_config/1"

# stream tags for derive_seed(config.seed, TAG, ...)
TAG_ENV = 1
TAG_EXPLORE = 2
TAG_REPLAY = 3
TAG_CRITIC = 4
TAG_INIT = 5
TAG_ACT = 6
TAG_ACTOR = 7


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray  # what the critic sees: visible action values or a continuous action
    reward: float
    next_state: np.ndarray
    done: bool  # true terminal (objective reached); time-limit cut-offs still bootstrap
    action_index: int | None = None

    def __post_init__(self):
        for name in ("state", "action", "next_state"):
            a = np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64))
            if not np.all(np.isfinite(a)):
                raise ValueError(f"non-finite entries in transition {name}")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not np.isfinite(self.reward):
            raise ValueError("non-finite reward")


class ReplayBuffer:
    """FIFO ring of transitions; uniform sampling with replacement."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self._items: list[Transition | None] = [None] * self.capacity
        self.inserted = 0

    def __len__(self) -> int:
        return min(self.inserted, self.capacity)

    def add(self, tr: Transition) -> None:
        self._items[self.inserted % self.capacity] = tr
        self.inserted += 1

    def contents(self) -> list[Transition]:
        """Oldest first."""
        n = len(self)
        start = self.inserted - n
        return [self._items[(start + k) % self.capacity] for k in range(n)]

    def latest(self) -> Transition:
        if not self.inserted:
            raise IndexError("empty buffer")
        return self._items[(self.inserted - 1) % self.capacity]

    def sample(self, n: int, rng: np.random.Generator) -> list[Transition]:
        if not len(self):
            raise IndexError("cannot sample from an empty buffer")
        items = self.contents()
        return [items[k] for k in rng.integers(0, len(items), n)]


@dataclass
class TrainConfig:
    epsilon_initial: float = 1.0
    epsilon_fraction: float = 0.5
    max_steps_per_episode: int = 20
    learning_rate: float = 0.01
    batch_size: int = 8
    discount: float = 0.9
    tau: float = 1.0
    warmup_random_fraction: float = 0.0
    total_interactions: int = 100
    anneal: AnnealParams = field(default_factory=AnnealParams)
    seed: int = 0
    replay_enabled: bool = True
    exploration_noise_sigma: float = 0.1
    # beyond the core list: model sizes and optimiser details
    replay_capacity: int = 10_000
    actor_learning_rate: float = 1e-3
    dqn_hidden: tuple[int, ...] = (128, 128)
    actor_hidden: tuple[int, ...] = (64, 64)
    critic_hidden: tuple[int, ...] = (64, 64)
    chimera_rows: int = 1
    chimera_cols: int = 2
    qbm_hidden_units: int = 0  # 0: Chimera rows x cols; n >= 2: complete bipartite graph on n units
    critic_backend: str = "sqa"
    init_scale: float = 0.1
    actor_final_scale: float = 0.1
    fd_step: float = 0.05
    q_offset: float = 0.0
    learn_q_offset: bool = False
    updates_per_interaction: int = 1  # gradient steps per environment step (continuous learners)

    def __post_init__(self):
        if isinstance(self.anneal, dict):
            self.anneal = AnnealParams.from_dict(self.anneal)
        for name in ("dqn_hidden", "actor_hidden", "critic_hidden"):
            setattr(self, name, tuple(int(x) for x in getattr(self, name)))
        if not 0.0 <= self.epsilon_initial <= 1.0:
            raise ValueError("epsilon_initial must lie in [0, 1]")
        if not 0.0 < self.epsilon_fraction <= 1.0:
            raise ValueError("epsilon_fraction must lie in (0, 1]")
        if self.max_steps_per_episode < 1:
            raise ValueError("max_steps_per_episode must be >= 1")
        if not self.learning_rate > 0 or not self.actor_learning_rate > 0:
            raise ValueError("learning rates must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must lie in [0, 1]")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if not 0.0 <= self.warmup_random_fraction < 1.0:
            raise ValueError("warmup_random_fraction must lie in [0, 1)")
        if self.total_interactions < 0:
            raise ValueError("total_interactions must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.exploration_noise_sigma < 0:
            raise ValueError("exploration_noise_sigma must be >= 0")
        if self.qbm_hidden_units == 1 or self.qbm_hidden_units < 0:
            raise ValueError("qbm_hidden_units must be 0 (Chimera) or >= 2")
        if self.updates_per_interaction < 1:
            raise ValueError("updates_per_interaction must be >= 1")
        if self.replay_capacity < 1:
            raise ValueError("replay_capacity must be >= 1")
        if self.critic_backend not in ("sqa", "exact"):
            raise ValueError(f"unknown critic_backend {self.critic_backend!r}")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["anneal"] = self.anneal.to_dict()
        for name in ("dqn_hidden", "actor_hidden", "critic_hidden"):
            d[name] = list(d[name])
        return {"schema": CONFIG_SCHEMA, **d}

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        doc = dict(doc)
        schema = doc.pop("schema", CONFIG_SCHEMA)
        if schema != CONFIG_SCHEMA:
            raise ValueError(f"unsupported config schema {schema!r}")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def critic_graph(config: TrainConfig):
    """Hidden graph of a QBM critic as selected by the config."""
    n = config.qbm_hidden_units
    if n:
        return bipartite_graph(n // 2, n - n // 2)
    return build_chimera(config.chimera_rows, config.chimera_cols)


def epsilon_at(t: int, config: TrainConfig) -> float:
    """Linear decay to zero over ``epsilon_fraction * total_interactions``."""
    horizon = config.epsilon_fraction * config.total_interactions
    if horizon <= 0:
        return 0.0
    return config.epsilon_initial * max(0.0, 1.0 - t / horizon)


def argmax_first(values: Sequence[float]) -> int:
    best = 0
    for k in range(1, len(values)):
        if values[k] > values[best]:
            best = k
    return best


def epsilon_greedy(q_of: Callable, state, epsilon: float, rng: np.random.Generator,
                   n_actions: int | None = None) -> int:
    """Random action with probability ``epsilon``, else argmax (lowest index on ties).

    ``q_of`` is only called on greedy draws when ``n_actions`` is given.
    """
    explore = rng.random() < epsilon
    if explore:
        n = n_actions if n_actions is not None else len(q_of(state))
        if n < 1:
            raise ValueError("need at least one action")
        return int(rng.integers(0, n))
    q = q_of(state)
    if len(q) < 1:
        raise ValueError("need at least one action")
    return argmax_first(q)


INTERACTION_FIELDS = ("interaction", "episode", "step", "reward", "delta_q", "epsilon")
EPISODE_FIELDS = ("episode", "initial_reward", "final_reward", "steps", "solved")


@dataclass
class TrainLog:
    interactions: list[dict] = field(default_factory=list)
    episodes: list[dict] = field(default_factory=list)
    checkpoints: list[dict] = field(default_factory=list)

    @property
    def n_interactions(self) -> int:
        return len(self.interactions)

    def record(self, episode: int, step: int, reward: float, delta_q: float, epsilon: float) -> None:
        self.interactions.append({
            "interaction": len(self.interactions) + 1, "episode": episode, "step": step,
            "reward": float(reward), "delta_q": float(delta_q), "epsilon": float(epsilon),
        })

    def end_episode(self, episode: int, initial_reward: float, final_reward: float, steps: int, solved: bool) -> None:
        self.episodes.append({
            "episode": episode, "initial_reward": float(initial_reward), "final_reward": float(final_reward),
            "steps": int(steps), "solved": int(bool(solved)),
        })

    def write_csv(self, interactions_path, episodes_path) -> None:
        _write_rows(interactions_path, INTERACTION_FIELDS, self.interactions)
        _write_rows(episodes_path, EPISODE_FIELDS, self.episodes)

    @classmethod
    def read_csv(cls, interactions_path, episodes_path) -> "TrainLog":
        conv = {"interaction": int, "episode": int, "step": int, "steps": int, "solved": int}
        def load(path):
            with open(path, newline="") as f:
                return [{k: conv.get(k, float)(v) for k, v in row.items()} for row in csv.DictReader(f)]
        return cls(load(interactions_path), load(episodes_path))


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in header])
