"""Ten-corrector, ten-BPM linear trajectory-steering model."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

N_CORRECTORS = 10
RESPONSE_SCHEMA = "ferl.awake_response/1"
MAX_CONDITION = 100.0
DEFAULT_RESPONSE_SEED = 0
_MAX_RETRIES = 1000
_RESET_ATTEMPTS = 100_000


def _pseudo_optics(rng: np.random.Generator, n: int) -> np.ndarray:
    # beta functions and phase advances along the line; BPM j sits just downstream of corrector j
    beta = rng.uniform(5.0, 15.0, n)
    beta_bpm = rng.uniform(5.0, 15.0, n)
    mu_corr = np.cumsum(rng.uniform(0.4, 0.9, n))
    mu_bpm = mu_corr + rng.uniform(0.4, 0.8, n)
    R = np.zeros((n, n))
    for j in range(n):
        for i in range(j + 1):
            R[j, i] = np.sqrt(beta_bpm[j] * beta[i]) * np.sin(mu_bpm[j] - mu_corr[i])
    return R


def make_response_matrix(seed: int = DEFAULT_RESPONSE_SEED, kick_bound: float = 300.0,
                         typical_shift_mm: float = 3.0, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """Synthetic lower-triangular response (mm per µrad) from a thin-lens optics caricature.

    Entry (j, i) ~ sqrt(beta_j beta_i) sin(mu_j - mu_i) for j >= i, zero upstream.
    Rescaled so the median full-range single kick moves a downstream BPM by
    ``typical_shift_mm``. Seeds ``seed, seed + 1, ...`` are tried until the
    condition number is at most ``max_condition``.
    """
    for attempt in range(_MAX_RETRIES):
        rng = np.random.default_rng([seed, attempt])
        R = _pseudo_optics(rng, N_CORRECTORS)
        if np.linalg.cond(R) <= max_condition:
            lower = np.abs(R[np.tril_indices(N_CORRECTORS)])
            return R * typical_shift_mm / (kick_bound * np.median(lower))
    raise RuntimeError(f"no response matrix with condition <= {max_condition} after {_MAX_RETRIES} attempts")


def save_response_matrix(path, R: np.ndarray, seed: int) -> None:
    Path(path).write_text(json.dumps({"schema": RESPONSE_SCHEMA, "seed": seed, "matrix": np.asarray(R).tolist()}))


def load_response_matrix(path=None) -> np.ndarray:
    """Load a response file; without a path, the shipped default."""
    if path is None:
        text = resources.files("ferl.envs").joinpath("data/awake_response.json").read_text()
    else:
        text = Path(path).read_text()
    doc = json.loads(text)
    if doc.get("schema") != RESPONSE_SCHEMA:
        raise ValueError(f"unsupported response-matrix schema {doc.get('schema')!r}")
    R = np.array(doc["matrix"], dtype=np.float64)
    if R.shape != (N_CORRECTORS, N_CORRECTORS):
        raise ValueError(f"response matrix must be {N_CORRECTORS}x{N_CORRECTORS}")
    return R


def rms(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.mean(x * x)))


@dataclass
class AwakeSteering10D:
    response: np.ndarray = field(default_factory=load_response_matrix)
    kick_bound: float = 300.0
    rms_objective: float = 1.6
    max_steps: int = 10
    init_rms_range: tuple[float, float] = (2.5, 8.0)
    state_bound: float = 20.0  # encoding range of each BPM reading, mm

    trajectory: np.ndarray = field(default=None, init=False)
    steps: int = field(default=0, init=False)
    done: bool = field(default=True, init=False)
    solved: bool = field(default=False, init=False)
    initial_reward: float = field(default=0.0, init=False)

    def __post_init__(self):
        self.response = np.array(self.response, dtype=np.float64)
        if self.response.shape != (N_CORRECTORS, N_CORRECTORS):
            raise ValueError(f"response must be {N_CORRECTORS}x{N_CORRECTORS}")
        if np.linalg.cond(self.response) > MAX_CONDITION:
            raise ValueError(f"response condition number exceeds {MAX_CONDITION}")
        lo, hi = self.init_rms_range
        self.init_rms_range = (float(lo), float(hi))
        if not 0.0 <= lo < hi:
            raise ValueError("init_rms_range must satisfy 0 <= low < high")
        if self.rms_objective <= 0:
            raise ValueError("rms_objective must be positive")
        self.trajectory = np.zeros(N_CORRECTORS)

    state_dim = N_CORRECTORS
    action_dim = N_CORRECTORS

    @property
    def state_low(self) -> np.ndarray:
        return -self.state_bound * np.ones(N_CORRECTORS)

    @property
    def state_high(self) -> np.ndarray:
        return self.state_bound * np.ones(N_CORRECTORS)

    @property
    def action_low(self) -> np.ndarray:
        return -np.ones(N_CORRECTORS)

    @property
    def action_high(self) -> np.ndarray:
        return np.ones(N_CORRECTORS)

    def reset(self, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        lo, hi = self.init_rms_range
        for _ in range(_RESET_ATTEMPTS):
            u = rng.uniform(-self.kick_bound, self.kick_bound, N_CORRECTORS)
            traj = self.response @ u
            if lo <= rms(traj) <= hi:
                return self.reset_to(traj)
        raise RuntimeError("init_rms_range is unreachable with the response matrix and kick bound")

    def reset_to(self, trajectory) -> np.ndarray:
        self.trajectory = np.array(trajectory, dtype=np.float64)
        self.steps = 0
        self.initial_reward = -rms(self.trajectory)
        self.solved = -self.initial_reward <= self.rms_objective
        self.done = self.solved
        return self.trajectory.copy()

    def apply(self, trajectory, action) -> np.ndarray:
        """Trajectory after one kick, without episode bookkeeping."""
        return np.asarray(trajectory) + self.response @ (np.asarray(action) * self.kick_bound)

    def step(self, action):
        a = np.asarray(action, dtype=np.float64)
        if a.shape != (N_CORRECTORS,) or not np.all(np.isfinite(a)):
            raise ValueError(f"action must be a finite {N_CORRECTORS}-vector")
        if np.any(np.abs(a) > 1.0):
            raise ValueError("action outside [-1, 1]^10")
        if self.done:
            raise RuntimeError("episode finished; call reset()")
        self.trajectory = self.apply(self.trajectory, a)
        self.steps += 1
        reward = -rms(self.trajectory)
        self.solved = -reward <= self.rms_objective
        self.done = self.solved or self.steps >= self.max_steps
        return self.trajectory.copy(), reward, self.done

    def oracle_action(self, trajectory) -> np.ndarray:
        """Linear-solve correction, clipped to the kick bounds."""
        return np.clip(-np.linalg.solve(self.response, trajectory) / self.kick_bound, -1.0, 1.0)

    def config(self) -> dict:
        return {
            "kind": "awake",
            "response": self.response.tolist(),
            "kick_bound": self.kick_bound,
            "rms_objective": self.rms_objective,
            "max_steps": self.max_steps,
            "init_rms_range": list(self.init_rms_range),
            "state_bound": self.state_bound,
        }
