"""Desk-scale random hyperparameter search."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..agents import TrainConfig
from ..sqa import AnnealParams
from ..sqa.rng import derive_seed
from .studies import Criterion, StudyResult, default_checkpoints, interactions_to_criterion, median_interactions

log = logging.getLogger(__name__)

SPACE_SCHEMA = "ferl.search_space/1"


@dataclass
class ParamRange:
    low: float
    high: float
    log: bool = False
    integer: bool = False

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"degenerate range [{self.low}, {self.high}]")
        if self.log and self.low <= 0:
            raise ValueError("log-uniform ranges need a positive lower bound")

    def sample(self, rng: np.random.Generator):
        if self.log:
            x = math.exp(rng.uniform(math.log(self.low), math.log(self.high)))
        else:
            x = rng.uniform(self.low, self.high)
        return int(round(x)) if self.integer else float(x)


@dataclass
class SearchSpace:
    """Ranges over TrainConfig fields; ``anneal.<name>`` addresses sampler parameters."""

    ranges: dict[str, ParamRange]
    trials: int = 20
    seeds_per_trial: int = 5
    checkpoints: list[int] = field(default_factory=lambda: default_checkpoints(100))

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("budget must be >= 1")
        if self.seeds_per_trial < 1:
            raise ValueError("seeds_per_trial must be >= 1")
        known = set(TrainConfig.__dataclass_fields__) | {f"anneal.{k}" for k in AnnealParams.__dataclass_fields__}
        for name in self.ranges:
            if name not in known:
                raise ValueError(f"unknown hyperparameter {name!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "SearchSpace":
        if doc.get("schema", SPACE_SCHEMA) != SPACE_SCHEMA:
            raise ValueError(f"unsupported search-space schema {doc.get('schema')!r}")
        ranges = {k: ParamRange(**v) for k, v in doc["ranges"].items()}
        kw = {k: doc[k] for k in ("trials", "seeds_per_trial", "checkpoints") if k in doc}
        return cls(ranges, **kw)

    @classmethod
    def load(cls, path) -> "SearchSpace":
        return cls.from_dict(json.loads(Path(path).read_text()))


def apply_params(base: TrainConfig, params: dict) -> TrainConfig:
    anneal = {k.split(".", 1)[1]: v for k, v in params.items() if k.startswith("anneal.")}
    plain = {k: v for k, v in params.items() if not k.startswith("anneal.")}
    cfg = replace(base, **plain)
    if anneal:
        cfg = replace(cfg, anneal=replace(cfg.anneal, **anneal))
    return cfg


def sample_params(space: SearchSpace, seed: int) -> list[dict]:
    rng = np.random.default_rng(derive_seed(seed, 0))
    return [{name: r.sample(rng) for name, r in sorted(space.ranges.items())} for _ in range(space.trials)]


def _sort_key(row):
    # lower median first; ties broken by higher final score, then trial index
    return (row["median_interactions"], -row["mean_last_score"], row["trial"])


def random_search(space: SearchSpace, algo: str, env_label: str, seed: int, base: TrainConfig | None = None,
                  criterion: Criterion | None = None, extra: list[dict] | None = None, runner=None):
    """Returns ``(best_config, ranked_rows)``; failures are recorded per trial.

    ``extra`` parameter sets are appended after the sampled ones. ``runner`` replaces
    :func:`interactions_to_criterion` (tests inject cheap fakes).
    """
    base = base or TrainConfig()
    runner = runner or interactions_to_criterion
    candidates = sample_params(space, seed) + [dict(p) for p in (extra or [])]
    rows = []
    for trial, params in enumerate(candidates):
        results, error = [], ""
        try:
            cfg = apply_params(base, params)
            for k in range(space.seeds_per_trial):
                results.append(runner(algo, env_label, replace(cfg, seed=derive_seed(seed, 1, trial, k)),
                                      space.checkpoints, criterion))
        except Exception as exc:  # a failing configuration is a data point, not a crash
            log.warning("trial %d failed: %s", trial, exc)
            error = f"{type(exc).__name__}: {exc}"
        rows.append({
            "trial": trial,
            "params": params,
            "median_interactions": median_interactions(results) if results and not error else math.inf,
            "solved_seeds": sum(r.reached for r in results),
            "mean_last_score": float(np.mean([r.last_score for r in results])) if results and not error else 0.0,
            "error": error,
        })
    ranked = sorted(rows, key=_sort_key)
    return apply_params(base, ranked[0]["params"]), ranked


def write_table(rows, path) -> None:
    names = sorted({k for r in rows for k in r["params"]})
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["rank", "trial", "median_interactions", "solved_seeds", "mean_last_score", *names, "error"])
        for rank, r in enumerate(rows):
            w.writerow([rank, r["trial"], repr(r["median_interactions"]), r["solved_seeds"], repr(r["mean_last_score"]),
                        *[repr(r["params"].get(n, "")) for n in names], r["error"]])


__all__ = ["ParamRange", "SearchSpace", "apply_params", "sample_params", "random_search", "write_table",
           "StudyResult"]
