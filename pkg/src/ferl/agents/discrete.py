"""Discrete-action learners: FERL Q-learning with a QBM critic, and DQN."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..critic import EncodingSpec, QbmCritic, encode_visible, init_critic, td_update
from ..neural import AdamState, DenseNet, adam_update, backward, forward, mlp, soft_update
from ..sqa.rng import derive_seed, state_seed
from ..topology import default_visible_mapping, zero_problem
from .common import (TAG_ACT, TAG_CRITIC, TAG_ENV, TAG_EXPLORE, TAG_INIT, TAG_REPLAY, ReplayBuffer,
                     TrainConfig, TrainLog, Transition, argmax_first, critic_graph, epsilon_at,
                     epsilon_greedy)

Callback = Callable[[int, object], bool]


def _require_discrete(env):
    if not hasattr(env, "n_actions"):
        raise ValueError("this trainer needs an environment with discrete actions")


def state_encoding(env, state) -> np.ndarray:
    """Affine map of a raw observation onto [-1, 1] (network input)."""
    return 2.0 * (np.asarray(state) - env.state_low) / (env.state_high - env.state_low) - 1.0


def ferl_encoding(env) -> EncodingSpec:
    a = np.asarray(env.action_values, dtype=np.float64)
    return EncodingSpec(env.state_low, env.state_high, [a.min()], [a.max()])


def make_ferl_critic(env, config: TrainConfig) -> QbmCritic:
    topo = critic_graph(config)
    enc = ferl_encoding(env)
    problem = zero_problem(topo, default_visible_mapping(topo, enc.state_dim, enc.action_dim))
    rng = np.random.default_rng(derive_seed(config.seed, TAG_INIT))
    return init_critic(problem, enc, config.anneal, rng, scale=config.init_scale,
                       learning_rate=config.learning_rate, discount=config.discount,
                       backend=config.critic_backend, q_offset=config.q_offset,
                       learn_offset=config.learn_q_offset)


def ferl_q_values(critic: QbmCritic, action_values, state, seed: int) -> list[float]:
    # common random numbers across actions so comparisons see correlated noise
    return [critic.q(encode_visible(state, [av], critic.encoding), seed)[0] for av in action_values]


class FerlPolicy:
    """Greedy policy of a QBM critic; the sampler seed is keyed on the exact state."""

    def __init__(self, critic: QbmCritic, action_values, seed: int = 0):
        self.critic = critic
        self.action_values = tuple(action_values)
        self.seed = seed
        self._cache: dict[bytes, list[float]] = {}

    def q_values(self, state) -> list[float]:
        s = np.asarray(state, dtype=np.float64)
        key = s.tobytes()
        if key not in self._cache:
            self._cache[key] = ferl_q_values(self.critic, self.action_values, s, state_seed(self.seed, s))
        return self._cache[key]

    def __call__(self, state) -> int:
        return argmax_first(self.q_values(state))


class DqnPolicy:
    def __init__(self, net: DenseNet, env):
        self.net = net
        self.env = env

    def q_values(self, state) -> list[float]:
        return list(forward(self.net, state_encoding(self.env, state)))

    def __call__(self, state) -> int:
        return argmax_first(self.q_values(state))


def _run_discrete(env, config: TrainConfig, greedy_q, learn, snapshot, callback, log: TrainLog) -> None:
    explore = np.random.default_rng(derive_seed(config.seed, TAG_EXPLORE))
    values = env.action_values
    t, episode = 0, 0
    stop = False
    while t < config.total_interactions and not stop:
        if episode > 100 * config.total_interactions + 1000:
            raise RuntimeError("every episode starts solved; check the environment configuration")
        s = env.reset(derive_seed(config.seed, TAG_ENV, episode))
        initial = final = env.initial_reward
        steps = 0
        while not env.done and steps < config.max_steps_per_episode and t < config.total_interactions:
            eps = epsilon_at(t, config)
            a = epsilon_greedy(lambda x: greedy_q(x, t), s, eps, explore, n_actions=env.n_actions)
            s2, r, _ = env.step(a)
            tr = Transition(s, [values[a]], r, s2, env.solved, a)
            delta = learn(tr, t)
            steps += 1
            t += 1
            final = r
            log.record(episode, steps, r, delta, eps)
            s = s2
            if callback is not None and callback(t, snapshot()):
                stop = True
                break
        log.end_episode(episode, initial, final, steps, env.solved)
        episode += 1


def train_ferl_q(env, config: TrainConfig, callback: Callback | None = None) -> tuple[QbmCritic, TrainLog]:
    """Q-learning with Q = -F of a clamped QBM.

    ``callback(t, critic)`` runs after interaction ``t``; returning True stops training.
    """
    _require_discrete(env)
    values = tuple(env.action_values)
    state = {"critic": make_ferl_critic(env, config)}
    state["target"] = state["critic"]
    buffer = ReplayBuffer(config.replay_capacity)
    replay_rng = np.random.default_rng(derive_seed(config.seed, TAG_REPLAY))
    log = TrainLog()

    def greedy_q(s, t):
        return ferl_q_values(state["critic"], values, s, derive_seed(config.seed, TAG_ACT, t))

    def learn(tr: Transition, t: int) -> float:
        if config.replay_enabled:
            buffer.add(tr)
            batch = buffer.sample(config.batch_size, replay_rng)
        else:
            batch = [tr]
        critic, target = state["critic"], state["target"]
        pairs, boot = [], []
        for k, b in enumerate(batch):
            if b.done:
                pairs.append((b, None))
                boot.append(0.0)
                continue
            qs = ferl_q_values(target, values, b.next_state, derive_seed(config.seed, TAG_CRITIC, t, k, 2))
            j = argmax_first(qs)
            pairs.append((b, [values[j]]))
            boot.append(qs[j])
        res = td_update(critic, pairs, derive_seed(config.seed, TAG_CRITIC, t), bootstrap=boot)
        state["critic"] = res.critic
        state["target"] = res.critic if config.tau == 1.0 else soft_update(target, res.critic, config.tau)
        return float(np.mean(np.abs(res.deltas)))

    _run_discrete(env, config, greedy_q, learn, lambda: state["critic"], callback, log)
    return state["critic"], log


def make_dqn(env, config: TrainConfig) -> DenseNet:
    rng = np.random.default_rng(derive_seed(config.seed, TAG_INIT))
    return mlp(env.state_dim, list(config.dqn_hidden), env.n_actions, "relu", rng)


def train_dqn(env, config: TrainConfig, callback: Callback | None = None) -> tuple[DenseNet, TrainLog]:
    """DQN with a soft-updated target network and mean-squared Bellman loss."""
    _require_discrete(env)
    state = {"net": make_dqn(env, config), "adam": AdamState(lr=config.learning_rate)}
    state["target"] = state["net"]
    buffer = ReplayBuffer(config.replay_capacity)
    replay_rng = np.random.default_rng(derive_seed(config.seed, TAG_REPLAY))
    log = TrainLog()

    def greedy_q(s, t):
        return list(forward(state["net"], state_encoding(env, s)))

    def learn(tr: Transition, t: int) -> float:
        if config.replay_enabled:
            buffer.add(tr)
            batch = buffer.sample(config.batch_size, replay_rng)
        else:
            batch = [tr]
        net, target = state["net"], state["target"]
        x = np.stack([state_encoding(env, b.state) for b in batch])
        x2 = np.stack([state_encoding(env, b.next_state) for b in batch])
        acts = np.array([b.action_index for b in batch])
        rewards = np.array([b.reward for b in batch])
        live = np.array([0.0 if b.done else 1.0 for b in batch])
        y = rewards + config.discount * live * forward(target, x2).max(axis=1)
        q = forward(net, x)
        rows = np.arange(len(batch))
        err = q[rows, acts] - y
        upstream = np.zeros_like(q)
        upstream[rows, acts] = 2.0 * err / len(batch)
        grads, _ = backward(net, x, upstream)
        net, state["adam"] = adam_update(net, grads, state["adam"])
        state["net"] = net
        state["target"] = net if config.tau == 1.0 else soft_update(target, net, config.tau)
        return float(np.mean(np.abs(err)))

    _run_discrete(env, config, greedy_q, learn, lambda: state["net"], callback, log)
    return state["net"], log


__all__ = [
    "FerlPolicy", "DqnPolicy", "train_ferl_q", "train_dqn", "make_ferl_critic", "make_dqn",
    "ferl_encoding", "ferl_q_values", "state_encoding",
]
