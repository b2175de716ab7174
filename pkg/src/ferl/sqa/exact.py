"""Exact enumeration of the replica-stacked Boltzmann distribution (small instances only)."""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from ..topology import IsingProblem
from .anneal import SampleStats, _energies, replica_coupling

MAX_SITES = 20
IDENTITY_RTOL = 1e-9


class FreeEnergyIdentityError(AssertionError):
    pass


def enumerate_stacks(n_hidden: int, n_replicas: int) -> np.ndarray:
    """All ``2**(n_hidden * n_replicas)`` stacks; site ``(j, l)`` is bit ``j * n_replicas + l``."""
    sites = n_hidden * n_replicas
    codes = np.arange(2 ** sites, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(sites, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8).reshape(-1, n_hidden, n_replicas)


def exact_stats(problem: IsingProblem, beta: float, gamma: float, n_replicas: int) -> SampleStats:
    sites = problem.n_hidden * n_replicas
    if sites > MAX_SITES:
        raise ValueError(f"exact enumeration limited to {MAX_SITES} sites, got {sites}")
    wplus = replica_coupling(beta, gamma, n_replicas)
    spins = enumerate_stacks(problem.n_hidden, n_replicas)
    energy = _energies(problem, spins, wplus)
    logw = -beta * energy
    log_z = logsumexp(logw)
    p = np.exp(logw - log_z)
    h = spins.astype(np.float64)
    edges = problem.topology.edge_array()
    mean_h = np.einsum("m,mjl->j", p, h) / n_replicas
    mean_hh = np.einsum("m,mel->e", p, h[:, edges[:, 0], :] * h[:, edges[:, 1], :]) / n_replicas
    mean_energy = float(p @ energy)
    nz = p > 0
    entropy = float(-(p[nz] * np.log(p[nz])).sum())
    free_energy = mean_energy - entropy / beta
    reference = -log_z / beta
    scale = max(abs(reference), abs(mean_energy), entropy / beta, np.finfo(float).tiny)
    if abs(free_energy - reference) > IDENTITY_RTOL * scale:
        raise FreeEnergyIdentityError(
            f"<H> - S/beta = {free_energy!r} disagrees with -ln Z / beta = {reference!r}"
        )
    return SampleStats(mean_h, mean_hh, mean_energy, max(entropy, 0.0), free_energy)


def log_partition(problem: IsingProblem, beta: float, gamma: float, n_replicas: int) -> float:
    wplus = replica_coupling(beta, gamma, n_replicas)
    spins = enumerate_stacks(problem.n_hidden, n_replicas)
    return float(logsumexp(-beta * _energies(problem, spins, wplus)))
