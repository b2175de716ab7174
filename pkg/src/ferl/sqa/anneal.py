"""Simulated quantum annealing on the replica-stacked (Suzuki-Trotter) Ising model."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..topology import IsingProblem
from . import backend, rng


# Metropolis with a fixed scan flips every zero-cost site deterministically; on a
# field-free replica ring the sweep operator is then not ergodic and the chain
# never reaches the Boltzmann distribution. The heat-bath rule has no such fixed points.
ACCEPTANCE = ("metropolis", "glauber")


@dataclass(frozen=True)
class AnnealParams:
    n_replicas: int = 5
    beta: float = 2.0
    gamma_initial: float = 20.0
    gamma_final: float = 0.5
    n_sweeps: int = 100
    num_reads: int = 100
    acceptance: str = "metropolis"  # or "glauber" (heat-bath), see ACCEPTANCE

    def __post_init__(self):
        if int(self.n_replicas) != self.n_replicas or self.n_replicas < 1:
            raise ValueError("n_replicas must be an integer >= 1")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.gamma_final > 0:
            raise ValueError("gamma_final must be positive")
        if not self.gamma_initial >= self.gamma_final:
            raise ValueError("gamma_initial must be >= gamma_final")
        if int(self.n_sweeps) != self.n_sweeps or self.n_sweeps < 1:
            raise ValueError("n_sweeps must be an integer >= 1")
        if int(self.num_reads) != self.num_reads or self.num_reads < 1:
            raise ValueError("num_reads must be an integer >= 1")
        if self.acceptance not in ACCEPTANCE:
            raise ValueError(f"acceptance must be one of {ACCEPTANCE}, got {self.acceptance!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "AnnealParams":
        return cls(**doc)


def replica_coupling(beta: float, gamma: float, n_replicas: int) -> float:
    """Ferromagnetic coupling between neighbouring Trotter slices.

    ``(1 / (2 beta)) * ln coth(gamma * beta / n_replicas)``.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if not gamma > 0:
        raise ValueError("gamma must be positive (the coupling diverges at gamma = 0)")
    if n_replicas < 1:
        raise ValueError("n_replicas must be >= 1")
    x = gamma * beta / n_replicas
    e = math.exp(-2.0 * x)
    # ln coth x = ln(1 + e^-2x) - ln(1 - e^-2x), stable for large x
    return (math.log1p(e) - math.log1p(-e)) / (2.0 * beta)


def gamma_schedule(params: AnnealParams) -> np.ndarray:
    """Transverse field for sweeps ``1..n_sweeps``, linear and ending at ``gamma_final``."""
    if params.n_sweeps == 1:
        return np.array([params.gamma_final])
    return np.linspace(params.gamma_initial, params.gamma_final, params.n_sweeps)


@dataclass(frozen=True, eq=False)
class ReplicaStackSample:
    """Spins ``h[j, l]`` of hidden node ``j`` in replica ``l``."""

    spins: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.spins)
        if s.ndim != 2:
            raise ValueError("spins must be a (n_hidden, n_replicas) matrix")
        if not np.all(np.abs(s) == 1):
            raise ValueError("spins must be +1 or -1")

    @property
    def n_hidden(self) -> int:
        return self.spins.shape[0]

    @property
    def n_replicas(self) -> int:
        return self.spins.shape[1]


@dataclass(frozen=True, eq=False)
class SampleStats:
    mean_h: np.ndarray
    mean_hh: np.ndarray  # aligned with topology.edges
    mean_energy: float
    entropy: float
    free_energy: float

    @property
    def q_value(self) -> float:
        return -self.free_energy


def _energies(problem: IsingProblem, spins: np.ndarray, wplus: float) -> np.ndarray:
    """Effective energy of each stack in ``spins`` (shape ``(M, n_hidden, n_replicas)``)."""
    nr = spins.shape[2]
    h = spins.astype(np.float64)
    edges = problem.topology.edge_array()
    coupling = np.einsum("e,mel->m", problem.hidden_weights, h[:, edges[:, 0], :] * h[:, edges[:, 1], :])
    field = np.einsum("j,mjl->m", problem.biases(), h)
    if nr > 1:
        # chain bonds plus the closing bond; for two replicas both join the same pair
        ring = np.einsum("mjl,mjl->m", h, np.roll(h, -1, axis=2))
    else:
        ring = np.zeros(len(h))
    return -(coupling + field) / nr - wplus * ring


def effective_energy(problem: IsingProblem, sample: ReplicaStackSample, beta: float, gamma: float, n_replicas: int) -> float:
    if sample.n_hidden != problem.n_hidden or sample.n_replicas != n_replicas:
        raise ValueError(
            f"sample shape {sample.spins.shape} does not match ({problem.n_hidden}, {n_replicas})"
        )
    wplus = replica_coupling(beta, gamma, n_replicas)
    return float(_energies(problem, np.asarray(sample.spins)[None], wplus)[0])


def neighbour_table(problem: IsingProblem):
    """CSR adjacency of the hidden graph with the coupling of each neighbour."""
    n = problem.n_hidden
    edges = problem.topology.edge_array()
    w = problem.hidden_weights
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    ww = np.concatenate([w, w])
    order = np.lexsort((dst, src))
    src, dst, ww = src[order], dst[order], ww[order]
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, src + 1, 1)
    ptr = np.cumsum(ptr)
    return ptr.astype(np.int64), np.ascontiguousarray(dst, dtype=np.int64), np.ascontiguousarray(ww, dtype=np.float64)


def anneal_keys(problem: IsingProblem, params: AnnealParams, keys: np.ndarray, kernel=None) -> np.ndarray:
    """Anneal one read per stream key; returns spins of shape ``(len(keys), n_hidden, n_replicas)``."""
    kernel = backend.anneal_reads if kernel is None else kernel
    ptr, idx, w = neighbour_table(problem)
    bias = np.ascontiguousarray(problem.biases(), dtype=np.float64)
    wplus = np.array([replica_coupling(params.beta, g, params.n_replicas) for g in gamma_schedule(params)])
    spins = np.zeros((len(keys), problem.n_hidden, params.n_replicas), dtype=np.int8)
    kernel(spins, np.ascontiguousarray(keys, dtype=np.uint64), ptr, idx, w, bias,
           float(params.beta), 1.0 / params.n_replicas, wplus, int(params.acceptance == "glauber"))
    return spins


def anneal_once(problem: IsingProblem, params: AnnealParams, seed: int) -> ReplicaStackSample:
    """One path-integral Monte Carlo anneal; deterministic in ``seed``."""
    keys = np.array([rng.stream_key(seed)], dtype=np.uint64)
    return ReplicaStackSample(anneal_keys(problem, params, keys)[0])


def stats_from_spins(problem: IsingProblem, spins: np.ndarray, params: AnnealParams) -> SampleStats:
    n_reads = spins.shape[0]
    h = spins.astype(np.float64)
    edges = problem.topology.edge_array()
    mean_h = h.mean(axis=(0, 2))
    mean_hh = (h[:, edges[:, 0], :] * h[:, edges[:, 1], :]).mean(axis=(0, 2))
    wplus = replica_coupling(params.beta, params.gamma_final, params.n_replicas)
    mean_energy = float(_energies(problem, spins, wplus).mean())
    if n_reads == 1:
        entropy = 0.0
    else:
        _, counts = np.unique(spins.reshape(n_reads, -1), axis=0, return_counts=True)
        p = counts / n_reads
        entropy = float(-(p * np.log(p)).sum())
    free_energy = mean_energy - entropy / params.beta
    return SampleStats(mean_h, mean_hh, mean_energy, entropy, free_energy)


def sample_stats(problem: IsingProblem, params: AnnealParams, seed: int, kernel=None) -> SampleStats:
    """Free-energy estimate from ``num_reads`` independent anneals.

    Read ``r`` is ``anneal_once(problem, params, rng.child_seed(seed, r))``.
    The entropy is the plug-in estimate over distinct whole-stack
    configurations, so it is zero for a single read and at most ``ln(num_reads)``.
    """
    spins = anneal_keys(problem, params, rng.read_keys(seed, params.num_reads), kernel=kernel)
    return stats_from_spins(problem, spins, params)
