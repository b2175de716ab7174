"""Interactions-to-criterion measurements shared by tuning and the acceptance studies.

A single training run is checkpointed on a schedule; the score is the first
checkpoint at which the evaluation criterion holds (``None`` if never).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..agents import TrainConfig
from ..envs.config import make_env
from .evaluation import evaluate, optimality
from .runs import check_pairing, policy_for, train_run

DISCRETE_KEYS = {"ferl-q": ("critic",), "dqn": ("q_network",)}


@dataclass
class Criterion:
    """TS1D: optimality 1.0 on ``grid_points`` starts. AWAKE: solve rate over ``episodes``."""

    grid_points: int = 50
    episodes: int = 500
    solve_rate: float = 0.95
    eval_seed: int = 1_000_003

    def score(self, algo: str, artifacts: dict, env_label: str) -> tuple[bool, float]:
        env = make_env(env_label)
        policy = policy_for(algo, artifacts, env, self.eval_seed)
        if env_label == "awake":
            rate = evaluate(policy, env, self.episodes, self.eval_seed).solve_rate
            return rate >= self.solve_rate, rate
        opt = optimality(policy, env, self.grid_points, stop_at_first_miss=True)
        return opt == 1.0, opt


def default_checkpoints(total: int, every: int = 5) -> list[int]:
    return list(range(every, total + 1, every))


@dataclass
class StudyResult:
    interactions: int | None
    last_score: float
    trained: int

    @property
    def reached(self) -> bool:
        return self.interactions is not None


def interactions_to_criterion(algo: str, env_label: str, config: TrainConfig, checkpoints,
                              criterion: Criterion | None = None, env_overrides: dict | None = None) -> StudyResult:
    check_pairing(algo, env_label)
    criterion = criterion or Criterion()
    marks = sorted(set(int(c) for c in checkpoints))
    if not marks:
        raise ValueError("need at least one checkpoint")
    config = replace(config, total_interactions=max(config.total_interactions, marks[-1]))
    marks_set = set(marks)
    state = {"hit": None, "score": float("nan")}

    def keys(agent):
        if algo in DISCRETE_KEYS:
            return {DISCRETE_KEYS[algo][0]: agent}
        actor, critic = agent
        return {"actor": actor, "critic": critic}

    def callback(t, agent):
        if t not in marks_set:
            return False
        ok, value = criterion.score(algo, keys(agent), env_label)
        state["score"] = value
        if ok:
            state["hit"] = t
            return True
        return t >= marks[-1]

    run = train_run(algo, make_env(env_label, env_overrides), config, callback)
    return StudyResult(state["hit"], state["score"], run.log.n_interactions)


def median_interactions(results, censor: float = np.inf) -> float:
    """Median with never-reached runs counted as ``censor`` (worse than any budget)."""
    values = [censor if r.interactions is None else r.interactions for r in results]
    return float(np.median(values)) if values else float("nan")


def variance_components(reports, column: str = "steps_taken") -> dict:
    """Seed and episode spread of one evaluation column, kept apart.

    ``seed_std`` is the spread of per-run means across training seeds;
    ``episode_std`` is the root mean of the within-run variances.
    """
    per_run = [np.array([e[column] for e in r.episodes], dtype=np.float64) for r in reports if len(r)]
    if not per_run:
        raise ValueError("need at least one non-empty report")
    means = np.array([x.mean() for x in per_run])
    return {
        "mean": float(means.mean()),
        "seed_std": float(means.std(ddof=1)) if len(means) > 1 else 0.0,
        "episode_std": float(np.sqrt(np.mean([x.var() for x in per_run]))),
        "n_runs": len(per_run),
    }
