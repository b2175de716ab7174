"""Command-line entry point: ``ferl {train,evaluate,optimality,tune,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..agents import TrainConfig
from ..envs.config import load_env_config, make_env
from .evaluation import evaluate, optimality
from .oracles import CHECKS, run_checks
from .runs import ALGOS, ENVS, load_run, policy_for, run_persist, run_policy, train_run
from .search import SearchSpace, random_search, write_table
from .studies import Criterion

log = logging.getLogger("ferl")

DEFAULT_EVAL_EPISODES = {"ts1d": 100, "ts1d-binary": 100, "awake": 500}


def _config(path, seed):
    cfg = TrainConfig.load(path) if path else TrainConfig()
    return cfg if seed is None else replace(cfg, seed=seed)


def _env(name, path):
    if path is None:
        return make_env(name)
    return load_env_config(path)


def cmd_train(args) -> int:
    cfg = _config(args.config, args.seed)
    env = _env(args.env, args.env_config)
    run = train_run(args.algo, env, cfg)
    n_eval = DEFAULT_EVAL_EPISODES[args.env] if args.eval_episodes is None else args.eval_episodes
    run.report = evaluate(run_policy(run, cfg.seed), _env(args.env, args.env_config), n_eval, cfg.seed)
    out = run_persist(run, args.out)
    print(json.dumps({"run": str(out), "interactions": run.log.n_interactions, **run.report.summary()}))
    return 0


def cmd_evaluate(args) -> int:
    run = load_run(args.run)
    report = evaluate(policy_for(run.algo, run.artifacts, run.env, args.seed), run.env, args.episodes, args.seed)
    out = Path(args.out) if args.out else Path(args.run) / f"evaluate-seed{args.seed}-n{args.episodes}.csv"
    report.write_csv(out)
    print(json.dumps({"csv": str(out), **report.summary()}))
    return 0


def cmd_optimality(args) -> int:
    run = load_run(args.run)
    if not hasattr(run.env, "deflection"):
        print("optimality is defined only for the ts1d environments", file=sys.stderr)
        return 2
    value = optimality(run_policy(run, args.seed), run.env, args.grid)
    print(json.dumps({"run": args.run, "grid": args.grid, "optimality": value}))
    return 0


def cmd_tune(args) -> int:
    space = SearchSpace.load(args.space)
    if args.budget is not None:
        space = replace(space, trials=args.budget)
    base = _config(args.config, None)
    extra = json.loads(Path(args.extra).read_text()) if args.extra else None
    best, rows = random_search(space, args.algo, args.env, args.seed, base=base, criterion=Criterion(), extra=extra)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(rows, out / "trials.csv")
    best.save(out / "best_config.json")
    print(json.dumps({"best_trial": rows[0]["trial"], "median_interactions": rows[0]["median_interactions"],
                      "trials_csv": str(out / "trials.csv")}))
    return 0


def cmd_oracle(args) -> int:
    results = run_checks(args.check)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ferl", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train an agent and persist the run")
    t.add_argument("--algo", choices=ALGOS, required=True)
    t.add_argument("--env", choices=ENVS, required=True)
    t.add_argument("--config", help="TrainConfig JSON (defaults when omitted)")
    t.add_argument("--env-config", help="environment config JSON (defaults when omitted)")
    t.add_argument("--seed", type=int, help="overrides the seed in --config")
    t.add_argument("--out", required=True, help="run directory (must not exist or be empty)")
    t.add_argument("--eval-episodes", type=int, help="episodes in eval.csv")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="greedy evaluation of a persisted run")
    e.add_argument("--run", required=True)
    e.add_argument("--episodes", type=int, required=True)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--out", help="CSV path (default inside the run directory)")
    e.set_defaults(func=cmd_evaluate)

    o = sub.add_parser("optimality", help="ts1d optimality of a persisted run")
    o.add_argument("--run", required=True)
    o.add_argument("--grid", type=int, required=True)
    o.add_argument("--seed", type=int, default=0, help="sampler key of the greedy QBM policy")
    o.set_defaults(func=cmd_optimality)

    s = sub.add_parser("tune", help="random hyperparameter search")
    s.add_argument("--space", required=True, help="search-space JSON")
    s.add_argument("--algo", choices=ALGOS, required=True)
    s.add_argument("--env", choices=ENVS, required=True)
    s.add_argument("--budget", type=int, help="number of sampled trials (overrides the space file)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config", help="base TrainConfig JSON")
    s.add_argument("--extra", help="JSON list of parameter sets appended to the sampled ones")
    s.add_argument("--out", default="tune-out")
    s.set_defaults(func=cmd_tune)

    c = sub.add_parser("oracle", help="run built-in consistency checks")
    c.add_argument("--check", choices=sorted(CHECKS), required=True)
    c.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileExistsError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
