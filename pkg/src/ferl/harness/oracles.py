"""Self-checks exposed through ``ferl oracle --check``.

Each check returns a list of :class:`CheckResult`; the CLI prints them and
exits nonzero if any failed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..critic import EncodingSpec, QbmCritic, action_gradient, exact_action_gradient
from ..envs import AwakeSteering10D, TargetSteering1D, make_env, ts1d_oracle_action
from ..envs.awake import rms
from ..neural import backward, forward, mlp
from ..sqa import AnnealParams, exact_stats, log_partition, sample_stats
from ..sqa.rng import derive_seed
from ..topology import IsingProblem, default_visible_mapping, small_graph
from .evaluation import evaluate, optimality


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def random_problem(rng: np.random.Generator, max_hidden: int = 4, scale: float = 1.0,
                   state_dim: int = 1, action_dim: int = 1) -> IsingProblem:
    """Random clamped QBM on a random subgraph of the complete graph."""
    n = int(rng.integers(1, max_hidden + 1))
    pairs = list(itertools.combinations(range(n), 2))
    edges = [p for p in pairs if rng.random() < 0.7]
    graph = small_graph(n, edges)
    mapping = default_visible_mapping(graph, state_dim, action_dim)
    hw = rng.uniform(-scale, scale, graph.n_edges)
    mask = mapping.mask(n)
    vw = np.where(mask, rng.uniform(-scale, scale, mask.shape), 0.0)
    problem = IsingProblem(graph, mapping, hw, vw)
    return problem.clamp(rng.uniform(-1.0, 1.0, mapping.n_visible))


def relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), np.finfo(float).tiny)


def check_free_energy_identity(n_instances: int = 50, seed: int = 0, tol: float = 1e-9) -> CheckResult:
    rng = np.random.default_rng(derive_seed(seed, 11))
    worst = 0.0
    for _ in range(n_instances):
        problem = random_problem(rng)
        n_r = int(rng.integers(1, 6))
        beta = float(rng.uniform(0.5, 5.0))
        gamma = float(rng.uniform(0.2, 3.0))
        stats = exact_stats(problem, beta, gamma, n_r)
        reference = -log_partition(problem, beta, gamma, n_r) / beta
        lhs = stats.mean_energy - stats.entropy / beta
        worst = max(worst, relative_error(lhs, reference))
    return CheckResult("free-energy identity", worst <= tol,
                       f"worst relative error {worst:.2e} over {n_instances} instances (tol {tol:g})")


def check_sqa_fidelity(n_instances: int = 20, num_reads: int = 1000, seed: int = 0, tol: float = 0.05,
                       gamma_final: float = 0.5) -> CheckResult:
    rng = np.random.default_rng(derive_seed(seed, 12))
    errors = []
    for k in range(n_instances):
        problem = random_problem(rng)
        beta = float(rng.uniform(0.5, 5.0))
        params = AnnealParams(n_replicas=5, beta=beta, gamma_final=gamma_final, num_reads=num_reads)
        exact = exact_stats(problem, beta, gamma_final, 5).free_energy
        est = sample_stats(problem, params, derive_seed(seed, 13, k)).free_energy
        errors.append(relative_error(est, exact))
    worst = max(errors)
    return CheckResult("sqa fidelity", worst <= tol,
                       f"worst relative free-energy error {worst:.3f}, median {np.median(errors):.3f} "
                       f"over {n_instances} instances with {num_reads} reads (tol {tol:g})")


def check_dense_gradient(seed: int = 0, h: float = 1e-5, tol: float = 1e-4) -> CheckResult:
    rng = np.random.default_rng(derive_seed(seed, 14))
    net = mlp(4, [6, 5], 3, "tanh", rng)
    x = rng.normal(size=4)
    up = rng.normal(size=3)
    grads, gx = backward(net, x, up)

    def loss(n, xx):
        return float(up @ forward(n, xx))

    worst = 0.0
    params = net.params()
    for p_idx, p in enumerate(params):
        for idx in np.ndindex(p.shape):
            plus = [q.copy() for q in params]
            minus = [q.copy() for q in params]
            plus[p_idx][idx] += h
            minus[p_idx][idx] -= h
            fd = (loss(net.with_params(plus), x) - loss(net.with_params(minus), x)) / (2 * h)
            worst = max(worst, _grad_error(grads[p_idx][idx], fd))
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        fd = (loss(net, x + e) - loss(net, x - e)) / (2 * h)
        worst = max(worst, _grad_error(gx[i], fd))
    return CheckResult("dense backprop", worst <= tol, f"worst relative error {worst:.2e} (tol {tol:g})")


def _grad_error(analytic: float, fd: float) -> float:
    # relative with a unit floor so that near-zero entries are compared absolutely
    return abs(analytic - fd) / max(abs(analytic), abs(fd), 1.0)


def tiny_exact_critic(rng: np.random.Generator, n_hidden: int = 3, action_dim: int = 2,
                      anneal: AnnealParams | None = None) -> QbmCritic:
    graph = small_graph(n_hidden, [(j, k) for j, k in itertools.combinations(range(n_hidden), 2)])
    mapping = default_visible_mapping(graph, 1, action_dim)
    mask = mapping.mask(n_hidden)
    problem = IsingProblem(graph, mapping, rng.uniform(-1, 1, graph.n_edges),
                           np.where(mask, rng.uniform(-1, 1, mask.shape), 0.0))
    encoding = EncodingSpec([-1.0], [1.0], -np.ones(action_dim), np.ones(action_dim))
    anneal = anneal or AnnealParams(n_replicas=3, beta=2.0, gamma_final=1.0)
    return QbmCritic(problem, encoding, anneal, backend="exact")


def check_action_gradient(seed: int = 0, n_cases: int = 10, fd_step: float = 1e-3, tol: float = 1e-4) -> CheckResult:
    rng = np.random.default_rng(derive_seed(seed, 15))
    worst = 0.0
    for _ in range(n_cases):
        critic = tiny_exact_critic(rng)
        s = rng.uniform(-1, 1, 1)
        a = rng.uniform(-0.9, 0.9, critic.encoding.action_dim)
        fd = action_gradient(critic, s, a, fd_step=fd_step)
        exact = exact_action_gradient(critic, s, a)
        worst = max(worst, max(_grad_error(x, y) for x, y in zip(exact, fd)))
    return CheckResult("critic action gradient", worst <= tol,
                       f"worst relative error {worst:.2e} at fd_step {fd_step:g} (tol {tol:g})")


def check_ts1d_oracle(grid_points: int = 200) -> CheckResult:
    results = []
    for name in ("ts1d", "ts1d-binary"):
        env = make_env(name)
        policy = _ts1d_oracle_policy(env)
        results.append(optimality(policy, env, grid_points))
    ok = all(r == 1.0 for r in results)
    return CheckResult("ts1d bfs oracle", ok, f"optimality {results} on {grid_points} grid points")


def _ts1d_oracle_policy(env: TargetSteering1D):
    # the policy sees only the observation, so follow the env's own deflection
    return lambda _obs: ts1d_oracle_action(env, env.deflection)


def check_awake_oracle(n_episodes: int = 50, seed: int = 0) -> CheckResult:
    env = make_env("awake")
    worst = 0.0
    rng = np.random.default_rng(derive_seed(seed, 16))
    for _ in range(n_episodes):
        # pick a start reachable with one feasible kick, so exact inversion applies
        u = rng.uniform(-0.5, 0.5, env.action_dim) * env.kick_bound
        traj = env.response @ u
        env.reset_to(traj)
        worst = max(worst, rms(env.apply(traj, env.oracle_action(traj))))
    report = evaluate(_awake_oracle_policy(env), env, n_episodes, seed)
    ok = worst <= 1e-9 and report.solve_rate == 1.0
    return CheckResult("awake inverse-kick oracle", ok,
                       f"worst residual rms {worst:.1e} mm; solve rate {report.solve_rate:.3f}")


def _awake_oracle_policy(env: AwakeSteering10D):
    return lambda obs: env.oracle_action(obs)


CHECKS = {
    "free-energy": (check_free_energy_identity, check_sqa_fidelity),
    "gradient": (check_dense_gradient, check_action_gradient),
    "env": (check_ts1d_oracle, check_awake_oracle),
}


def run_checks(kind: str) -> list[CheckResult]:
    if kind not in CHECKS:
        raise ValueError(f"unknown check {kind!r}; expected one of {sorted(CHECKS)}")
    return [fn() for fn in CHECKS[kind]]
