"""Training runs as on-disk artifacts: config, logs, checkpoints, manifest."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__
from ..agents import (ActorPolicy, DqnPolicy, FerlPolicy, TrainConfig, TrainLog, train_ddpg, train_dqn,
                      train_ferl_q, train_hybrid_ac)
from ..critic import QbmCritic
from ..envs.config import ENV_SCHEMA, env_from_config, env_name, make_env
from ..neural import DenseNet
from ..sqa import BACKEND
from .evaluation import EvalReport

RUN_SCHEMA = "ferl.run/1"
ALGOS = ("ferl-q", "dqn", "hybrid-ac", "ddpg")
ENVS = ("ts1d", "ts1d-binary", "awake")
_DISCRETE = {"ferl-q", "dqn"}


@dataclass
class Run:
    algo: str
    env: object
    config: TrainConfig
    artifacts: dict = field(default_factory=dict)
    log: TrainLog = field(default_factory=TrainLog)
    report: EvalReport | None = None


def check_pairing(algo: str, env_label: str) -> None:
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGOS}")
    if env_label not in ENVS:
        raise ValueError(f"unknown environment {env_label!r}; expected one of {ENVS}")
    if (algo in _DISCRETE) != (env_label != "awake"):
        kind = "discrete" if algo in _DISCRETE else "continuous"
        raise ValueError(f"{algo} needs a {kind}-action environment, got {env_label}")


def train_run(algo: str, env, config: TrainConfig, callback=None) -> Run:
    check_pairing(algo, env_name(env))
    if algo == "ferl-q":
        critic, log = train_ferl_q(env, config, callback)
        artifacts = {"critic": critic}
    elif algo == "dqn":
        net, log = train_dqn(env, config, callback)
        artifacts = {"q_network": net}
    elif algo == "hybrid-ac":
        actor, critic, log = train_hybrid_ac(env, config, callback)
        artifacts = {"actor": actor, "critic": critic}
    else:
        actor, critic, log = train_ddpg(env, config, callback)
        artifacts = {"actor": actor, "critic_network": critic}
    return Run(algo, env, config, artifacts, log)


def policy_for(algo: str, artifacts: dict, env, seed: int = 0):
    """Greedy (no exploration) policy; ``seed`` keys the sampler of QBM policies."""
    if algo == "ferl-q":
        return FerlPolicy(artifacts["critic"], env.action_values, seed)
    if algo == "dqn":
        return DqnPolicy(artifacts["q_network"], env)
    return ActorPolicy(artifacts["actor"], env)


def run_policy(run: Run, seed: int = 0):
    return policy_for(run.algo, run.artifacts, run.env, seed)


def run_persist(run: Run, out_dir) -> Path:
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()):
        raise FileExistsError(f"run directory {out} already exists and is not empty")
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, text):
        (out / name).write_text(text)
        written.append(name)

    put("config.json", json.dumps({
        "schema": RUN_SCHEMA,
        "algo": run.algo,
        "env_name": env_name(run.env),
        "env": {"schema": ENV_SCHEMA, **run.env.config()},
        "train": run.config.to_dict(),
    }, indent=1))
    run.log.write_csv(out / "metrics.csv", out / "episodes.csv")
    written += ["metrics.csv", "episodes.csv"]
    for name, obj in sorted(run.artifacts.items()):
        put(f"{name}.json", json.dumps(obj.to_dict()))
    if run.report is not None:
        run.report.write_csv(out / "eval.csv")
        written.append("eval.csv")
    manifest = {
        "schema": RUN_SCHEMA,
        "code_version": __version__,
        "sampler_backend": BACKEND,
        "seeds": {"train": run.config.seed},
        "artifacts": {name: f"{name}.json" for name in sorted(run.artifacts)},
        "files": written + ["manifest.json"],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return out


def load_run(run_dir) -> Run:
    d = Path(run_dir)
    cfg = json.loads((d / "config.json").read_text())
    if cfg.get("schema") != RUN_SCHEMA:
        raise ValueError(f"unsupported run schema {cfg.get('schema')!r}")
    manifest = json.loads((d / "manifest.json").read_text())
    env_doc = dict(cfg["env"])
    env_doc.pop("schema", None)
    env = env_from_config(env_doc)
    artifacts = {}
    for name, fname in manifest["artifacts"].items():
        doc = json.loads((d / fname).read_text())
        artifacts[name] = QbmCritic.from_dict(doc) if doc.get("schema", "").startswith("ferl.qbm_critic") else DenseNet.from_dict(doc)
    log = TrainLog.read_csv(d / "metrics.csv", d / "episodes.csv")
    report = EvalReport.read_csv(d / "eval.csv") if (d / "eval.csv").exists() else None
    return Run(cfg["algo"], env, TrainConfig.from_dict(cfg["train"]), artifacts, log, report)


def fresh_env(name: str, overrides: dict | None = None):
    return make_env(name, overrides)
