"""Continuous-action learners sharing one DDPG-shaped loop.

The hybrid scheme swaps the dense critic for a QBM critic whose action
gradient is estimated by finite differences with common random numbers.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..critic import EncodingSpec, QbmCritic, action_gradient, init_critic, td_update
from ..neural import AdamState, DenseNet, adam_update, backward, forward, mlp, soft_update
from ..sqa.rng import derive_seed
from ..topology import default_visible_mapping, zero_problem
from .common import (TAG_ACTOR, TAG_CRITIC, TAG_ENV, TAG_EXPLORE, TAG_INIT, TAG_REPLAY,
                     ReplayBuffer, TrainConfig, TrainLog, Transition, critic_graph)
from .discrete import state_encoding

Callback = Callable[[int, object], bool]


def _require_continuous(env):
    if not hasattr(env, "action_low"):
        raise ValueError("this trainer needs an environment with continuous actions")


def make_actor(env, config: TrainConfig) -> DenseNet:
    rng = np.random.default_rng(derive_seed(config.seed, TAG_INIT, 0))
    return mlp(env.state_dim, list(config.actor_hidden), env.action_dim, "tanh", rng,
               output_low=env.action_low, output_high=env.action_high, final_scale=config.actor_final_scale)


def make_qbm_critic(env, config: TrainConfig) -> QbmCritic:
    topo = critic_graph(config)
    enc = EncodingSpec(env.state_low, env.state_high, env.action_low, env.action_high)
    problem = zero_problem(topo, default_visible_mapping(topo, enc.state_dim, enc.action_dim))
    rng = np.random.default_rng(derive_seed(config.seed, TAG_INIT, 1))
    return init_critic(problem, enc, config.anneal, rng, scale=config.init_scale,
                       learning_rate=config.learning_rate, discount=config.discount,
                       backend=config.critic_backend, q_offset=config.q_offset,
                       learn_offset=config.learn_q_offset)


def make_dense_critic(env, config: TrainConfig) -> DenseNet:
    rng = np.random.default_rng(derive_seed(config.seed, TAG_INIT, 1))
    return mlp(env.state_dim + env.action_dim, list(config.critic_hidden), 1, "relu", rng)


class ActorPolicy:
    """Deterministic actor on normalised observations."""

    def __init__(self, actor: DenseNet, env):
        self.actor = actor
        self.env = env

    def __call__(self, state) -> np.ndarray:
        return np.clip(forward(self.actor, state_encoding(self.env, state)), self.env.action_low, self.env.action_high)


def _run_continuous(env, config: TrainConfig, actor_of, learn, snapshot, callback, log: TrainLog) -> None:
    explore = np.random.default_rng(derive_seed(config.seed, TAG_EXPLORE))
    low, high = env.action_low, env.action_high
    warmup = int(np.floor(config.warmup_random_fraction * config.total_interactions))
    t, episode = 0, 0
    stop = False
    while t < config.total_interactions and not stop:
        if episode > 100 * config.total_interactions + 1000:
            raise RuntimeError("every episode starts solved; check the environment configuration")
        s = env.reset(derive_seed(config.seed, TAG_ENV, episode))
        initial = final = env.initial_reward
        steps = 0
        while not env.done and steps < config.max_steps_per_episode and t < config.total_interactions:
            if t < warmup:
                a = explore.uniform(low, high)
            else:
                a = forward(actor_of(), state_encoding(env, s))
                if config.exploration_noise_sigma > 0:
                    a = a + explore.normal(0.0, config.exploration_noise_sigma, a.shape)
                a = np.clip(a, low, high)
            s2, r, _ = env.step(a)
            tr = Transition(s, a, r, s2, env.solved)
            if t < warmup and config.replay_enabled:
                learn.store(tr)  # random-policy warmup only fills the buffer
                delta = 0.0
            else:
                delta = learn(tr, t)
            steps += 1
            t += 1
            final = r
            log.record(episode, steps, r, delta, 0.0)
            s = s2
            if callback is not None and callback(t, snapshot()):
                stop = True
                break
        log.end_episode(episode, initial, final, steps, env.solved)
        episode += 1


class _Learner:
    """Buffer handling shared by both continuous trainers."""

    def __init__(self, config: TrainConfig):
        self.config = config
        self.buffer = ReplayBuffer(config.replay_capacity)
        self.rng = np.random.default_rng(derive_seed(config.seed, TAG_REPLAY))

    def store(self, tr: Transition) -> None:
        self.buffer.add(tr)

    def batch(self, tr: Transition) -> list[Transition]:
        if not self.config.replay_enabled:
            return [tr]
        return self.buffer.sample(self.config.batch_size, self.rng)

    def __call__(self, tr: Transition, t: int) -> float:
        if self.config.replay_enabled:
            self.buffer.add(tr)
        deltas = [self.update(self.batch(tr), t, u) for u in range(self.config.updates_per_interaction)]
        return float(np.mean(deltas))


class _HybridLearner(_Learner):
    def __init__(self, env, config: TrainConfig):
        super().__init__(config)
        self.env = env
        self.actor = make_actor(env, config)
        self.critic = make_qbm_critic(env, config)
        self.target_actor, self.target_critic = self.actor, self.critic
        self.adam = AdamState(lr=config.actor_learning_rate)

    def update(self, batch: list[Transition], t: int, u: int) -> float:
        cfg = self.config
        env = self.env
        pairs = [(b, None if b.done else forward(self.target_actor, state_encoding(env, b.next_state))) for b in batch]
        res = td_update(self.critic, pairs, derive_seed(cfg.seed, TAG_CRITIC, t, u), target=self.target_critic)
        self.critic = res.critic
        x = np.stack([state_encoding(env, b.state) for b in batch])
        acts = forward(self.actor, x)
        scale = self.critic.encoding.action_scale
        g = np.stack([
            action_gradient(self.critic, b.state, a, cfg.fd_step, derive_seed(cfg.seed, TAG_ACTOR, t, u, k)) * scale
            for k, (b, a) in enumerate(zip(batch, acts))
        ])
        grads, _ = backward(self.actor, x, g / len(batch))
        self.actor, self.adam = adam_update(self.actor, grads, self.adam, ascent=True)
        if cfg.tau == 1.0:
            self.target_actor, self.target_critic = self.actor, self.critic
        else:
            self.target_actor = soft_update(self.target_actor, self.actor, cfg.tau)
            self.target_critic = soft_update(self.target_critic, self.critic, cfg.tau)
        return float(np.mean(np.abs(res.deltas)))


class _DdpgLearner(_Learner):
    def __init__(self, env, config: TrainConfig):
        super().__init__(config)
        self.env = env
        self.actor = make_actor(env, config)
        self.critic = make_dense_critic(env, config)
        self.target_actor, self.target_critic = self.actor, self.critic
        self.actor_adam = AdamState(lr=config.actor_learning_rate)
        self.critic_adam = AdamState(lr=config.learning_rate)

    def update(self, batch: list[Transition], t: int, u: int) -> float:
        cfg = self.config
        env = self.env
        n = len(batch)
        x = np.stack([state_encoding(env, b.state) for b in batch])
        x2 = np.stack([state_encoding(env, b.next_state) for b in batch])
        a = np.stack([b.action for b in batch])
        r = np.array([b.reward for b in batch])
        live = np.array([0.0 if b.done else 1.0 for b in batch])
        a2 = forward(self.target_actor, x2)
        y = r + cfg.discount * live * forward(self.target_critic, np.hstack([x2, a2]))[:, 0]
        xa = np.hstack([x, a])
        err = forward(self.critic, xa)[:, 0] - y
        grads, _ = backward(self.critic, xa, (2.0 * err / n)[:, None])
        self.critic, self.critic_adam = adam_update(self.critic, grads, self.critic_adam)
        # actor: ascend Q(s, actor(s)) through the critic's action input
        acts = forward(self.actor, x)
        _, g_in = backward(self.critic, np.hstack([x, acts]), np.full((n, 1), 1.0 / n))
        grads, _ = backward(self.actor, x, g_in[:, env.state_dim:])
        self.actor, self.actor_adam = adam_update(self.actor, grads, self.actor_adam, ascent=True)
        if cfg.tau == 1.0:
            self.target_actor, self.target_critic = self.actor, self.critic
        else:
            self.target_actor = soft_update(self.target_actor, self.actor, cfg.tau)
            self.target_critic = soft_update(self.target_critic, self.critic, cfg.tau)
        return float(np.mean(np.abs(err)))


def train_hybrid_ac(env, config: TrainConfig, callback: Callback | None = None) -> tuple[DenseNet, QbmCritic, TrainLog]:
    """Dense actor trained on finite-difference action gradients of a QBM critic.

    ``callback(t, (actor, critic))`` runs after interaction ``t``; returning True stops.
    """
    _require_continuous(env)
    learner = _HybridLearner(env, config)
    log = TrainLog()
    _run_continuous(env, config, lambda: learner.actor, learner, lambda: (learner.actor, learner.critic), callback, log)
    return learner.actor, learner.critic, log


def train_ddpg(env, config: TrainConfig, callback: Callback | None = None) -> tuple[DenseNet, DenseNet, TrainLog]:
    _require_continuous(env)
    learner = _DdpgLearner(env, config)
    log = TrainLog()
    _run_continuous(env, config, lambda: learner.actor, learner, lambda: (learner.actor, learner.critic), callback, log)
    return learner.actor, learner.critic, log
