"""Training algorithms: FERL Q-learning, DQN, DDPG and the hybrid actor-critic."""

from .common import (EPISODE_FIELDS, INTERACTION_FIELDS, ReplayBuffer, TrainConfig, TrainLog, Transition,
                     argmax_first, epsilon_at, epsilon_greedy)
from .continuous import (ActorPolicy, make_actor, make_dense_critic, make_qbm_critic, train_ddpg,
                         train_hybrid_ac)
from .discrete import (DqnPolicy, FerlPolicy, ferl_encoding, ferl_q_values, make_dqn, make_ferl_critic,
                       state_encoding, train_dqn, train_ferl_q)

__all__ = [
    "EPISODE_FIELDS", "INTERACTION_FIELDS", "ReplayBuffer", "TrainConfig", "TrainLog", "Transition",
    "argmax_first", "epsilon_at", "epsilon_greedy",
    "ActorPolicy", "make_actor", "make_dense_critic", "make_qbm_critic", "train_ddpg", "train_hybrid_ac",
    "DqnPolicy", "FerlPolicy", "ferl_encoding", "ferl_q_values", "make_dqn", "make_ferl_critic",
    "state_encoding", "train_dqn", "train_ferl_q",
]
