"""Beam-line simulations: 1-D target steering and 10-D trajectory steering."""

from .awake import (AwakeSteering10D, load_response_matrix, make_response_matrix, rms,
                    save_response_matrix)
from .config import env_from_config, load_env_config, make_env, save_env_config
from .ts1d import (DECREASE, INCREASE, UNREACHABLE, TargetSteering1D, goal_interval,
                   ts1d_binary_variant, ts1d_optimal_steps, ts1d_oracle_action)

__all__ = [
    "AwakeSteering10D", "load_response_matrix", "make_response_matrix", "rms", "save_response_matrix",
    "env_from_config", "load_env_config", "make_env", "save_env_config",
    "DECREASE", "INCREASE", "UNREACHABLE", "TargetSteering1D", "goal_interval",
    "ts1d_binary_variant", "ts1d_optimal_steps", "ts1d_oracle_action",
]
