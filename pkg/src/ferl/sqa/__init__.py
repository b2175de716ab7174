"""Simulated quantum annealing sampler and exact enumeration oracle."""

from .anneal import (
    AnnealParams,
    ReplicaStackSample,
    SampleStats,
    anneal_keys,
    anneal_once,
    effective_energy,
    gamma_schedule,
    replica_coupling,
    sample_stats,
    stats_from_spins,
)
from .backend import BACKEND
from .exact import MAX_SITES, FreeEnergyIdentityError, exact_stats, log_partition

__all__ = [
    "AnnealParams",
    "BACKEND",
    "FreeEnergyIdentityError",
    "MAX_SITES",
    "ReplicaStackSample",
    "SampleStats",
    "anneal_keys",
    "anneal_once",
    "effective_energy",
    "exact_stats",
    "gamma_schedule",
    "log_partition",
    "replica_coupling",
    "sample_stats",
    "stats_from_spins",
]
