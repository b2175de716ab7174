"""One-dimensional proton target steering (a single dipole, two discrete actions)."""

from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.special import ndtr

DECREASE, INCREASE = 0, 1
_TRUNCATION = 3.0  # overlap integral restricted to +-3 sigma of the beam
_NORM = float(ndtr(_TRUNCATION) - ndtr(-_TRUNCATION))
UNREACHABLE = -1


@dataclass
class TargetSteering1D:
    """Dipole deflection (µrad) steers the beam centre across a target.

    The agent observes one BPM reading ``bpm_gain * deflection`` (mm). The
    beam centre on the target plane is ``target_gain * deflection + target_offset``.
    """

    deflection_low: float = -140.0
    deflection_high: float = 140.0
    action_delta: float = 15.0
    bpm_gain: float = 0.05
    target_gain: float = 0.1
    target_offset: float = 0.0
    target_center: float = 0.0
    target_half_width: float = 1.6
    beam_sigma: float = 0.5
    reward_threshold: float = 0.8
    max_steps: int = 20
    variant: str = "continuous_state"
    bits: int = 0

    deflection: float = field(default=0.0, init=False)
    steps: int = field(default=0, init=False)
    done: bool = field(default=True, init=False)
    solved: bool = field(default=False, init=False)
    initial_reward: float = field(default=0.0, init=False)

    n_actions = 2
    action_values = (-1.0, 1.0)  # visible encoding of DECREASE, INCREASE

    def __post_init__(self):
        if self.variant not in ("continuous_state", "binary"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "binary" and self.bits < 2:
            raise ValueError("the binary variant needs bits >= 2")
        if not 0.0 < self.reward_threshold < 1.0:
            raise ValueError("reward_threshold must lie in (0, 1)")

    # -- geometry -------------------------------------------------------------
    def beam_center(self, deflection: float) -> float:
        return self.target_gain * deflection + self.target_offset

    def reward_at(self, deflection: float) -> float:
        mu = self.beam_center(deflection)
        sigma = self.beam_sigma
        lo = max(self.target_center - self.target_half_width, mu - _TRUNCATION * sigma)
        hi = min(self.target_center + self.target_half_width, mu + _TRUNCATION * sigma)
        if hi <= lo:
            return 0.0
        r = (ndtr((hi - mu) / sigma) - ndtr((lo - mu) / sigma)) / _NORM
        return float(min(max(r, 0.0), 1.0))

    def in_goal(self, deflection: float) -> bool:
        return self.reward_at(deflection) >= self.reward_threshold

    def next_deflection(self, deflection: float, action: int) -> float:
        delta = self.action_delta if action == INCREASE else -self.action_delta
        return float(min(max(deflection + delta, self.deflection_low), self.deflection_high))

    # -- observation ----------------------------------------------------------
    @property
    def state_dim(self) -> int:
        return self.bits if self.variant == "binary" else 1

    @property
    def state_low(self) -> np.ndarray:
        if self.variant == "binary":
            return -np.ones(self.bits)
        return np.array([self.bpm_gain * self.deflection_low])

    @property
    def state_high(self) -> np.ndarray:
        if self.variant == "binary":
            return np.ones(self.bits)
        return np.array([self.bpm_gain * self.deflection_high])

    def observe(self, deflection: float) -> np.ndarray:
        if self.variant == "binary":
            levels = 2 ** self.bits
            span = self.deflection_high - self.deflection_low
            q = int(np.floor((deflection - self.deflection_low) / span * levels))
            q = min(max(q, 0), levels - 1)
            code = [(q >> b) & 1 for b in range(self.bits - 1, -1, -1)]
            return np.array([2.0 * c - 1.0 for c in code])
        return np.array([self.bpm_gain * deflection])

    # -- episode --------------------------------------------------------------
    def reset(self, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return self.reset_to(float(rng.uniform(self.deflection_low, self.deflection_high)))

    def reset_to(self, deflection: float) -> np.ndarray:
        self.deflection = float(min(max(deflection, self.deflection_low), self.deflection_high))
        self.steps = 0
        self.initial_reward = self.reward_at(self.deflection)
        self.solved = self.initial_reward >= self.reward_threshold
        self.done = self.solved
        return self.observe(self.deflection)

    def step(self, action: int):
        if action not in (DECREASE, INCREASE):
            raise ValueError(f"action must be {DECREASE} (decrease) or {INCREASE} (increase), got {action!r}")
        if self.done:
            raise RuntimeError("episode finished; call reset()")
        self.deflection = self.next_deflection(self.deflection, action)
        self.steps += 1
        reward = self.reward_at(self.deflection)
        self.solved = reward >= self.reward_threshold
        self.done = self.solved or self.steps >= self.max_steps
        return self.observe(self.deflection), reward, self.done

    def config(self) -> dict:
        d = asdict(self)
        for k in ("deflection", "steps", "done", "solved", "initial_reward"):
            d.pop(k)
        return {"kind": "ts1d", **d}


def ts1d_binary_variant(env: TargetSteering1D, bits: int) -> TargetSteering1D:
    if bits < 2:
        raise ValueError("bits must be >= 2")
    return replace(env, variant="binary", bits=bits)


def ts1d_optimal_steps(env: TargetSteering1D, deflection: float, max_depth: int = 1000) -> int:
    """Fewest ±delta moves from ``deflection`` into the goal set (breadth-first search)."""
    start = float(min(max(deflection, env.deflection_low), env.deflection_high))
    if env.in_goal(start):
        return 0
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        d, depth = queue.popleft()
        if depth >= max_depth:
            break
        for a in (DECREASE, INCREASE):
            nd = env.next_deflection(d, a)
            if nd in seen:
                continue
            if env.in_goal(nd):
                return depth + 1
            seen.add(nd)
            queue.append((nd, depth + 1))
    return UNREACHABLE


def ts1d_oracle_action(env: TargetSteering1D, deflection: float) -> int:
    """First move of a shortest path to the goal (decrease on ties)."""
    best, best_a = None, DECREASE
    for a in (DECREASE, INCREASE):
        nd = env.next_deflection(deflection, a)
        n = 0 if env.in_goal(nd) else ts1d_optimal_steps(env, nd)
        if n != UNREACHABLE and (best is None or n < best):
            best, best_a = n, a
    return best_a


def goal_interval(env: TargetSteering1D, resolution: float = 1e-3) -> tuple[float, float]:
    """Approximate deflection interval of the goal set (for reports; BFS uses exact tests)."""
    grid = np.arange(env.deflection_low, env.deflection_high + resolution, resolution)
    inside = [d for d in grid if env.in_goal(d)]
    if not inside:
        return (float("nan"), float("nan"))
    return (min(inside), max(inside))
