import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ferl.agents import TrainConfig
from ferl.envs import make_env, ts1d_oracle_action
from ferl.harness import cli, oracles
from ferl.harness.evaluation import EvalReport, evaluate, optimality, optimality_grid
from ferl.harness.runs import check_pairing, load_run, run_persist, run_policy, train_run
from ferl.harness.search import ParamRange, SearchSpace, apply_params, random_search, sample_params, write_table
from ferl.harness.studies import Criterion, StudyResult, interactions_to_criterion, median_interactions
from ferl.sqa import AnnealParams

SMALL_DQN = TrainConfig(total_interactions=40, dqn_hidden=(16,), learning_rate=1e-3, seed=2)


def oracle_policy(env):
    return lambda _obs: ts1d_oracle_action(env, env.deflection)


def test_optimality_of_oracle_and_of_bad_policy():
    env = make_env("ts1d")
    assert optimality(oracle_policy(env), env, 60) == 1.0
    assert optimality(lambda s: 1, env, 60) < 0.6
    assert optimality(lambda s: 0, env, 60, stop_at_first_miss=True) == 0.0
    with pytest.raises(ValueError):
        optimality(lambda s: 0, make_env("awake"), 10)


def test_optimality_grid_cells():
    g = optimality_grid(make_env("ts1d"), 4)
    assert np.allclose(g, [-105, -35, 35, 105])


def test_evaluate_deterministic_and_csv(tmp_path):
    env = make_env("awake")
    pol = lambda obs: env.oracle_action(obs)
    a = evaluate(pol, env, 10, 3)
    b = evaluate(pol, make_env("awake"), 10, 3)
    assert a.episodes == b.episodes and a.solve_rate == 1.0
    a.write_csv(tmp_path / "e.csv")
    back = EvalReport.read_csv(tmp_path / "e.csv")
    assert back.episodes == a.episodes
    s = a.summary()
    assert s["n_episodes"] == 10 and sum(s["step_histogram"]) == 10


def test_pairing_rules():
    check_pairing("ferl-q", "ts1d-binary")
    for algo, env in [("ddpg", "ts1d"), ("dqn", "awake"), ("ppo", "ts1d"), ("dqn", "pong")]:
        with pytest.raises(ValueError):
            check_pairing(algo, env)


def test_run_persist_and_reload(tmp_path):
    run = train_run("dqn", make_env("ts1d"), SMALL_DQN)
    run.report = evaluate(run_policy(run), make_env("ts1d"), 5, 0)
    out = run_persist(run, tmp_path / "r")
    manifest = json.loads((out / "manifest.json").read_text())
    for f in manifest["files"]:
        assert (out / f).exists()
    back = load_run(out)
    assert back.config == SMALL_DQN and back.algo == "dqn"
    assert back.log.interactions == run.log.interactions
    assert optimality(run_policy(back), back.env, 20) == optimality(run_policy(run), make_env("ts1d"), 20)
    with pytest.raises(FileExistsError):
        run_persist(run, out)


def test_run_persist_ferl_critic(tmp_path):
    cfg = TrainConfig(total_interactions=3, batch_size=1, anneal=AnnealParams(num_reads=4, n_sweeps=5))
    run = train_run("ferl-q", make_env("ts1d"), cfg)
    back = load_run(run_persist(run, tmp_path / "f"))
    assert np.array_equal(back.artifacts["critic"].problem.visible_weights,
                          run.artifacts["critic"].problem.visible_weights)


def test_interactions_to_criterion_stops_at_first_hit():
    res = interactions_to_criterion("dqn", "ts1d", SMALL_DQN, [10, 20, 30], Criterion(grid_points=10))
    assert res.trained == (res.interactions or 30)
    with pytest.raises(ValueError):
        interactions_to_criterion("dqn", "ts1d", SMALL_DQN, [])


def test_median_censoring():
    rs = [StudyResult(10, 1.0, 10), StudyResult(None, 0.5, 100), StudyResult(30, 1.0, 30)]
    assert median_interactions(rs) == 30
    assert median_interactions(rs[1:2]) == math.inf
    assert median_interactions(rs, censor=1000)


def test_param_range_sampling():
    rng = np.random.default_rng(0)
    xs = [ParamRange(1e-4, 1e-1, log=True).sample(rng) for _ in range(200)]
    assert min(xs) >= 1e-4 and max(xs) <= 1e-1 and np.median(xs) < 1e-2
    assert all(isinstance(ParamRange(1, 9, integer=True).sample(rng), int) for _ in range(5))
    with pytest.raises(ValueError):
        ParamRange(1, 1)
    with pytest.raises(ValueError):
        ParamRange(0, 1, log=True)


def test_space_validation_and_apply():
    with pytest.raises(ValueError):
        SearchSpace({"not_a_field": ParamRange(0, 1)})
    space = SearchSpace.from_dict({"ranges": {"learning_rate": {"low": 0.01, "high": 0.1},
                                              "anneal.beta": {"low": 1, "high": 5}}, "trials": 3})
    params = sample_params(space, 7)
    assert params == sample_params(space, 7) and len(params) == 3
    cfg = apply_params(TrainConfig(), params[0])
    assert cfg.anneal.beta == params[0]["anneal.beta"]


def test_random_search_ranks_and_records_failures(tmp_path):
    def fake(algo, env, cfg, checkpoints, criterion):
        if cfg.learning_rate > 0.5:
            raise RuntimeError("diverged")
        return StudyResult(int(100 * cfg.learning_rate) + 1, 1.0, 10)

    space = SearchSpace({"learning_rate": ParamRange(0.0, 0.4)}, trials=4, seeds_per_trial=2)
    best, rows = random_search(space, "dqn", "ts1d", 0, extra=[{"learning_rate": 0.9}], runner=fake)
    assert [r["median_interactions"] for r in rows] == sorted(r["median_interactions"] for r in rows)
    assert rows[-1]["error"].startswith("RuntimeError") and rows[-1]["median_interactions"] == math.inf
    assert best.learning_rate == rows[0]["params"]["learning_rate"]
    write_table(rows, tmp_path / "t.csv")
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 6


def test_oracle_checks_cheap():
    assert oracles.check_free_energy_identity(10).passed
    assert oracles.check_action_gradient(n_cases=3).passed
    res = oracles.check_sqa_fidelity(n_instances=2, num_reads=50)
    assert "worst relative" in res.detail
    with pytest.raises(ValueError):
        oracles.run_checks("nope")


def test_cli_train_evaluate_optimality(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    SMALL_DQN.save(cfg)
    assert cli.main(["train", "--algo", "dqn", "--env", "ts1d", "--config", str(cfg), "--seed", "5",
                     "--out", str(tmp_path / "run"), "--eval-episodes", "4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["interactions"] == 40 and out["n_episodes"] == 4
    assert load_run(tmp_path / "run").config.seed == 5
    assert cli.main(["evaluate", "--run", str(tmp_path / "run"), "--episodes", "3", "--seed", "1"]) == 0
    assert (tmp_path / "run" / "evaluate-seed1-n3.csv").exists()
    capsys.readouterr()
    assert cli.main(["optimality", "--run", str(tmp_path / "run"), "--grid", "10"]) == 0
    assert 0.0 <= json.loads(capsys.readouterr().out)["optimality"] <= 1.0
    # second train into the same directory is refused
    assert cli.main(["train", "--algo", "dqn", "--env", "ts1d", "--config", str(cfg), "--out",
                     str(tmp_path / "run")]) == 1


def test_cli_rejects_bad_pairing(tmp_path):
    assert cli.main(["train", "--algo", "ddpg", "--env", "ts1d", "--out", str(tmp_path / "x")]) == 1


def test_cli_tune(tmp_path, capsys):
    space = {"schema": "ferl.search_space/1", "ranges": {"learning_rate": {"low": 1e-4, "high": 1e-2, "log": True}},
             "seeds_per_trial": 1, "checkpoints": [20]}
    (tmp_path / "space.json").write_text(json.dumps(space))
    base = tmp_path / "base.json"
    SMALL_DQN.save(base)
    assert cli.main(["tune", "--space", str(tmp_path / "space.json"), "--algo", "dqn", "--env", "ts1d",
                     "--budget", "2", "--config", str(base), "--out", str(tmp_path / "t")]) == 0
    assert TrainConfig.load(tmp_path / "t" / "best_config.json").dqn_hidden == (16,)
    assert len((tmp_path / "t" / "trials.csv").read_text().splitlines()) == 3


def test_cli_oracle_exit_codes(monkeypatch, capsys):
    assert cli.main(["oracle", "--check", "env"]) == 0
    assert capsys.readouterr().out.count("PASS") == 2
    monkeypatch.setitem(oracles.CHECKS, "gradient", (lambda: oracles.CheckResult("x", False, "forced"),))
    assert cli.main(["oracle", "--check", "gradient"]) == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ferl", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "optimality" in out.stdout
    bad = subprocess.run([sys.executable, "-m", "ferl", "oracle", "--check", "nope"], capture_output=True)
    assert bad.returncode != 0


def test_variance_components_split():
    from ferl.harness import variance_components
    mk = lambda steps: EvalReport([{"steps_taken": s} for s in steps])
    v = variance_components([mk([1, 3]), mk([5, 7])])
    assert v["mean"] == 4.0 and v["episode_std"] == 1.0
    assert v["seed_std"] == pytest.approx(np.std([2, 6], ddof=1))
    with pytest.raises(ValueError):
        variance_components([EvalReport()])
