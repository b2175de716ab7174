"""Named training configurations used by the acceptance studies.

These are the tuned settings the studies run with; each is also shipped as
JSON under ``configs/`` for the CLI.
"""

from __future__ import annotations

from ..agents import TrainConfig
from ..sqa import AnnealParams

_FERL = dict(
    anneal=AnnealParams(beta=5.0, gamma_final=2.0),
    learning_rate=0.2,
    init_scale=0.5,
    learn_q_offset=True,
    discount=0.5,
    batch_size=8,
)

_DQN = dict(learning_rate=1e-3, batch_size=64, tau=0.2, discount=0.9)

_DDPG = dict(discount=0.5, batch_size=32, exploration_noise_sigma=0.05, updates_per_interaction=10)

PRESETS = {
    "study-a-ferl": TrainConfig(total_interactions=100, **_FERL),
    "study-a-dqn": TrainConfig(total_interactions=1000, **_DQN),
    # the smallest critic that exact enumeration handles (4 hidden units x 3 replicas)
    "study-a-ferl-exact": TrainConfig(total_interactions=100, critic_backend="exact", qbm_hidden_units=4,
                                      **{**_FERL, "anneal": AnnealParams(beta=5.0, gamma_final=2.0, n_replicas=3)}),
    "study-b-hybrid": TrainConfig(total_interactions=100, critic_backend="exact", qbm_hidden_units=4,
                                  anneal=AnnealParams(n_replicas=3), learning_rate=0.05, actor_learning_rate=3e-3,
                                  discount=0.0, batch_size=8),
    "study-b-ddpg": TrainConfig(total_interactions=200, **_DDPG),
}


def preset(name: str) -> TrainConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    return PRESETS[name]
