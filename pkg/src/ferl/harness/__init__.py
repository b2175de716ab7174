"""Evaluation protocol, studies, search, run persistence and the CLI."""

from .evaluation import EVAL_FIELDS, EvalReport, evaluate, optimality, optimality_grid, run_episode
from .runs import ALGOS, ENVS, RUN_SCHEMA, Run, check_pairing, load_run, policy_for, run_persist, train_run
from .search import ParamRange, SearchSpace, apply_params, random_search, sample_params, write_table
from .studies import (Criterion, StudyResult, default_checkpoints, interactions_to_criterion, median_interactions,
                      variance_components)

__all__ = [
    "EVAL_FIELDS", "EvalReport", "evaluate", "optimality", "optimality_grid", "run_episode",
    "ALGOS", "ENVS", "RUN_SCHEMA", "Run", "check_pairing", "load_run", "policy_for", "run_persist", "train_run",
    "ParamRange", "SearchSpace", "apply_params", "random_search", "sample_params", "write_table",
    "Criterion", "StudyResult", "default_checkpoints", "interactions_to_criterion", "median_interactions",
    "variance_components",
]
