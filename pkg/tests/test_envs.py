import numpy as np
import pytest

from ferl.envs import AwakeSteering10D, TargetSteering1D, make_env, ts1d_oracle_action
from ferl.envs.awake import make_response_matrix, load_response_matrix, rms, save_response_matrix
from ferl.envs.config import env_name, load_env_config, save_env_config
from ferl.envs.ts1d import UNREACHABLE, goal_interval, ts1d_binary_variant, ts1d_optimal_steps
from ferl.harness.oracles import check_awake_oracle, check_ts1d_oracle


def test_ts1d_goal_geometry():
    env = TargetSteering1D()
    lo, hi = goal_interval(env, 1e-3)
    assert lo == pytest.approx(-11.806, abs=2e-3) and hi == pytest.approx(11.806, abs=2e-3)
    assert env.reward_at(0.0) > env.reward_at(20.0) > env.reward_at(60.0)
    assert env.reward_at(140.0) == 0.0


def test_ts1d_reward_bounds_and_symmetry():
    env = TargetSteering1D()
    d = np.linspace(-140, 140, 101)
    r = np.array([env.reward_at(x) for x in d])
    assert np.all((r >= 0) & (r <= 1))
    assert np.allclose(r, r[::-1])


def test_ts1d_episode_dynamics():
    env = TargetSteering1D()
    obs = env.reset_to(45.0)
    assert obs.tolist() == [2.25]
    assert not env.done
    obs, r, done = env.step(0)
    assert env.deflection == 30.0 and not done
    env.step(0)
    obs, r, done = env.step(0)
    assert env.deflection == 0.0 and done and env.solved and r >= 0.8
    with pytest.raises(RuntimeError):
        env.step(0)


def test_ts1d_clips_at_bounds_and_times_out():
    env = TargetSteering1D(max_steps=3)
    env.reset_to(-135.0)
    env.step(0)
    assert env.deflection == -140.0
    env.step(0)
    _, _, done = env.step(0)
    assert done and not env.solved
    with pytest.raises(ValueError):
        TargetSteering1D().step(2)


def test_ts1d_bfs_optimal_steps():
    env = TargetSteering1D()
    assert ts1d_optimal_steps(env, 0.0) == 0
    assert ts1d_optimal_steps(env, 45.0) == 3
    assert ts1d_optimal_steps(env, -140.0) == 9
    assert ts1d_oracle_action(env, 45.0) == 0 and ts1d_oracle_action(env, -45.0) == 1
    far = TargetSteering1D(target_center=1000.0)
    assert ts1d_optimal_steps(far, 0.0) == UNREACHABLE


def test_ts1d_reset_is_seeded():
    a, b = TargetSteering1D(), TargetSteering1D()
    assert np.array_equal(a.reset(5), b.reset(5))
    assert a.deflection == b.deflection


def test_binary_variant_codes():
    env = ts1d_binary_variant(TargetSteering1D(), 5)
    codes = {tuple(env.observe(d)) for d in np.linspace(-140, 140, 1000)}
    assert len(codes) == 32
    assert env.observe(-140.0).tolist() == [-1.0] * 5
    assert env.observe(140.0).tolist() == [1.0] * 5
    assert env.state_dim == 5
    with pytest.raises(ValueError):
        ts1d_binary_variant(TargetSteering1D(), 1)


def test_ts1d_oracle_check():
    assert check_ts1d_oracle(100).passed


def test_response_matrix_properties():
    R = load_response_matrix()
    assert R.shape == (10, 10)
    assert np.all(np.triu(R, 1) == 0.0)
    assert np.linalg.cond(R) <= 100.0
    assert np.array_equal(R, make_response_matrix(0))


def test_response_round_trip(tmp_path):
    R = make_response_matrix(3)
    save_response_matrix(tmp_path / "r.json", R, 3)
    assert np.array_equal(load_response_matrix(tmp_path / "r.json"), R)
    env = make_env("awake", {"response_file": str(tmp_path / "r.json")})
    assert np.array_equal(env.response, R)


def test_awake_reset_range_and_solve():
    env = AwakeSteering10D()
    for seed in range(20):
        s = env.reset(seed)
        assert 2.5 <= rms(s) <= 8.0 and not env.done
    s2, r, done = env.step(env.oracle_action(s))
    assert done and env.solved and r == pytest.approx(-rms(s2))


def test_awake_rejects_bad_actions():
    env = AwakeSteering10D()
    env.reset(0)
    with pytest.raises(ValueError):
        env.step(np.full(10, 1.5))
    with pytest.raises(ValueError):
        env.step(np.zeros(9))
    with pytest.raises(ValueError):
        AwakeSteering10D(response=np.ones((10, 10)))


def test_awake_timeout():
    env = AwakeSteering10D(max_steps=2)
    env.reset(0)
    env.step(np.zeros(10))
    _, _, done = env.step(np.zeros(10))
    assert done and not env.solved


def test_awake_oracle_check():
    assert check_awake_oracle(20).passed


@pytest.mark.parametrize("name", ["ts1d", "ts1d-binary", "awake"])
def test_env_config_round_trip(tmp_path, name):
    env = make_env(name)
    save_env_config(env, tmp_path / "e.json")
    back = load_env_config(tmp_path / "e.json")
    assert env_name(back) == name
    assert back.config() == env.config()


def test_make_env_unknown():
    with pytest.raises(ValueError):
        make_env("cartpole")
