"""Greedy-policy evaluation and the TS1D optimality metric."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..envs.ts1d import UNREACHABLE, TargetSteering1D, ts1d_optimal_steps
from ..sqa.rng import derive_seed

EVAL_FIELDS = ("episode", "seed", "steps_taken", "initial_reward", "final_reward", "solved")


@dataclass
class EvalReport:
    episodes: list[dict] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.episodes)

    def _col(self, name) -> np.ndarray:
        return np.array([e[name] for e in self.episodes], dtype=np.float64)

    @property
    def solve_rate(self) -> float:
        return float(self._col("solved").mean()) if self.episodes else 0.0

    def summary(self) -> dict:
        if not self.episodes:
            return {"n_episodes": 0, "solve_rate": 0.0}
        out = {"n_episodes": len(self.episodes), "solve_rate": self.solve_rate}
        for name in ("steps_taken", "initial_reward", "final_reward"):
            col = self._col(name)
            out[f"{name}_mean"] = float(col.mean())
            out[f"{name}_std"] = float(col.std())
        steps = self._col("steps_taken").astype(int)
        out["step_histogram"] = np.bincount(steps).tolist()
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(EVAL_FIELDS)
            for e in self.episodes:
                w.writerow([e["episode"], e["seed"], e["steps_taken"], repr(float(e["initial_reward"])),
                            repr(float(e["final_reward"])), int(e["solved"])])

    @classmethod
    def read_csv(cls, path) -> "EvalReport":
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        return cls([{
            "episode": int(r["episode"]), "seed": int(r["seed"]), "steps_taken": int(r["steps_taken"]),
            "initial_reward": float(r["initial_reward"]), "final_reward": float(r["final_reward"]),
            "solved": bool(int(r["solved"])),
        } for r in rows])


def run_episode(policy, env, seed: int) -> dict:
    env.reset(seed)
    initial = final = env.initial_reward
    while not env.done:
        _, final, _ = env.step(policy(_observe(env)))
    return {"seed": seed, "steps_taken": env.steps, "initial_reward": initial, "final_reward": final,
            "solved": bool(env.solved)}


def _observe(env):
    if isinstance(env, TargetSteering1D):
        return env.observe(env.deflection)
    return env.trajectory.copy()


def evaluate(policy, env, n_episodes: int, seed: int) -> EvalReport:
    """Deterministic rollouts; episode k is seeded with ``derive_seed(seed, k)``."""
    if n_episodes < 0:
        raise ValueError("n_episodes must be >= 0")
    episodes = []
    for k in range(n_episodes):
        row = run_episode(policy, env, derive_seed(seed, k))
        episodes.append({"episode": k, **row})
    return EvalReport(episodes)


def optimality_grid(env: TargetSteering1D, grid_points: int) -> np.ndarray:
    """Cell centres of ``grid_points`` equal cells spanning the deflection range."""
    if grid_points < 1:
        raise ValueError("grid_points must be >= 1")
    span = env.deflection_high - env.deflection_low
    return env.deflection_low + (np.arange(grid_points) + 0.5) * span / grid_points


def _optimal_from(policy, env: TargetSteering1D, d0: float) -> bool:
    need = ts1d_optimal_steps(env, d0)
    if need == UNREACHABLE:
        raise RuntimeError(f"goal unreachable from deflection {d0}")
    s = env.reset_to(d0)
    while not env.done:
        s, _, _ = env.step(policy(s))
    return env.solved and env.steps == need


def optimality(policy, env: TargetSteering1D, grid_points: int, stop_at_first_miss: bool = False) -> float:
    """Fraction of grid starts from which the greedy rollout takes exactly the BFS-optimal step count."""
    if not hasattr(env, "deflection"):
        raise ValueError("optimality is defined for the 1-D target-steering environment")
    grid = optimality_grid(env, grid_points)
    hits = 0
    for d0 in grid:
        if _optimal_from(policy, env, float(d0)):
            hits += 1
        elif stop_at_first_miss:
            return hits / len(grid)
    return hits / len(grid)
