import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ferl.agents.common import Transition
from ferl.critic import (EncodingSpec, QbmCritic, action_gradient, decode_continuous, encode_visible,
                         exact_action_gradient, init_critic, q_value, td_update)
from ferl.harness.oracles import tiny_exact_critic
from ferl.sqa import AnnealParams, exact_stats
from ferl.topology import build_chimera, default_visible_mapping, zero_problem


def ts1d_spec():
    return EncodingSpec([-1.0], [1.0], [-1.0], [1.0])


def test_encoding_affine_and_inverse():
    spec = EncodingSpec([-140.0], [140.0], [-15.0], [15.0])
    v = encode_visible([70.0], [-15.0], spec)
    assert np.allclose(v, [0.5, -1.0])
    s, a = decode_continuous(v, spec)
    assert np.allclose(s, [70.0]) and np.allclose(a, [-15.0])


def test_encoding_clamps_and_counts():
    spec = ts1d_spec()
    v = encode_visible([3.0], [-0.5], spec)
    assert np.allclose(v, [1.0, -0.5])
    assert spec.clamped_count == 1


def test_encoding_rejects_wrong_dims():
    with pytest.raises(ValueError):
        encode_visible([0.0, 1.0], [0.0], ts1d_spec())


def test_binary_encoding_bits():
    spec = EncodingSpec([0.0], [8.0], [0.0], [2.0], mode="binary", bits_per_dim=3)
    v = encode_visible([5.2], [0.1], spec)
    # level 5 -> 101, level 0 -> 000
    assert v.tolist() == [1.0, -1.0, 1.0, -1.0, -1.0, -1.0]
    assert spec.n_visible == 6


def test_encoding_validation():
    with pytest.raises(ValueError):
        EncodingSpec([1.0], [1.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        EncodingSpec([0.0], [1.0], [0.0], [1.0], mode="binary")


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_decode_round_trip(s, a):
    spec = EncodingSpec([-3.0], [5.0], [-2.0], [0.5])
    state, action = decode_continuous([s, a], spec)
    assert np.allclose(encode_visible(state, action, spec), [s, a])


def default_critic(backend="sqa", **kw):
    topo = build_chimera(1, 2)
    problem = zero_problem(topo, default_visible_mapping(topo, 1, 1))
    return init_critic(problem, ts1d_spec(), AnnealParams(num_reads=20, n_sweeps=20), np.random.default_rng(0),
                       backend=backend, **kw)


def test_default_critic_has_52_weights():
    assert default_critic().n_weights == 52


def test_q_is_negative_free_energy_plus_offset():
    c = tiny_exact_critic(np.random.default_rng(1))
    c = c.with_weights(c.problem.hidden_weights, c.problem.visible_weights, q_offset=0.25)
    q, stats = q_value(c, [0.3], [0.1, -0.2], seed=0)
    exact = exact_stats(c.problem.clamp(encode_visible([0.3], [0.1, -0.2], c.encoding)), 2.0, 1.0, 3)
    assert q == pytest.approx(-exact.free_energy + 0.25)
    assert stats.q_value == -stats.free_energy


def test_sqa_q_is_deterministic_in_seed():
    c = default_critic()
    assert q_value(c, [0.2], [0.5], 7)[0] == q_value(c, [0.2], [0.5], 7)[0]


def test_td_update_matches_rule_on_terminal_transition():
    c = tiny_exact_critic(np.random.default_rng(2), action_dim=1)
    tr = Transition([0.4], [-0.3], 1.0, [0.0], True)
    res = td_update(c, [(tr, None)], seed=0)
    v = encode_visible([0.4], [-0.3], c.encoding)
    q, stats = c.q(v, 0)
    delta = 1.0 - q
    assert res.deltas[0] == pytest.approx(delta)
    expect_v = np.where(c.problem.mask, c.learning_rate * delta * np.outer(v, stats.mean_h), 0.0)
    assert np.allclose(res.visible_increment, expect_v)
    assert np.allclose(res.hidden_increment, c.learning_rate * delta * stats.mean_hh)
    assert np.allclose(res.critic.problem.visible_weights, c.problem.visible_weights + expect_v)


def test_td_update_bootstraps_and_averages():
    c = tiny_exact_critic(np.random.default_rng(3), action_dim=1)
    a = Transition([0.4], [-0.3], -0.5, [0.1], False)
    b = Transition([-0.2], [0.8], 0.0, [0.5], True)
    both = td_update(c, [(a, [0.2]), (b, None)], seed=0)
    q_next = q_value(c, [0.1], [0.2], 0)[0]
    assert both.deltas[0] == pytest.approx(-0.5 + c.discount * q_next - q_value(c, [0.4], [-0.3], 0)[0])
    alone = [td_update(c, [(t, n)], seed=0) for t, n in [(a, [0.2]), (b, None)]]
    assert np.allclose(both.hidden_increment, (alone[0].hidden_increment + alone[1].hidden_increment) / 2)
    pre = td_update(c, [(a, None)], seed=0, bootstrap=[q_next])
    assert pre.deltas[0] == pytest.approx(both.deltas[0])


def test_td_update_keeps_mask_and_rejects_empty():
    c = default_critic()
    tr = Transition([0.4], [-0.3], 1.0, [0.0], False)
    res = td_update(c, [(tr, [0.5])], seed=1)
    assert np.all(res.critic.problem.visible_weights[~c.problem.mask] == 0.0)
    with pytest.raises(ValueError):
        td_update(c, [], seed=0)


def test_learned_offset_moves_with_mean_delta():
    c = default_critic(backend="sqa", learn_offset=True)
    tr = Transition([0.4], [-0.3], 1.0, [0.0], True)
    res = td_update(c, [(tr, None)], seed=0)
    assert res.critic.q_offset == pytest.approx(c.learning_rate * res.deltas[0])
    fixed = td_update(default_critic(), [(tr, None)], seed=0)
    assert fixed.critic.q_offset == 0.0


def test_action_gradient_exact_matches_closed_form():
    c = tiny_exact_critic(np.random.default_rng(4))
    s, a = [0.1], np.array([0.3, -0.6])
    assert np.allclose(action_gradient(c, s, a, fd_step=1e-4), exact_action_gradient(c, s, a), atol=1e-7)


def test_action_gradient_one_sided_at_bounds():
    c = tiny_exact_critic(np.random.default_rng(5))
    s, a = [0.1], np.array([1.0, -1.0])
    assert np.allclose(action_gradient(c, s, a, fd_step=1e-5), exact_action_gradient(c, s, a), atol=1e-3)


def test_action_gradient_crn_repeatable():
    topo = build_chimera(1, 1)
    problem = zero_problem(topo, default_visible_mapping(topo, 1, 2))
    c = init_critic(problem, EncodingSpec([-1.0], [1.0], [-1, -1], [1, 1]), AnnealParams(num_reads=10, n_sweeps=20),
                    np.random.default_rng(0), scale=0.5)
    g1 = action_gradient(c, [0.2], [0.1, 0.4], 0.05, seed=9)
    g2 = action_gradient(c, [0.2], [0.1, 0.4], 0.05, seed=9)
    assert np.array_equal(g1, g2)
    with pytest.raises(ValueError):
        action_gradient(c, [0.2], [0.1, 0.4], 0.0)


def test_checkpoint_round_trip(tmp_path):
    c = default_critic(learn_offset=True)
    c = c.with_weights(c.problem.hidden_weights, c.problem.visible_weights, 0.5)
    c.save(tmp_path / "c.json")
    d = QbmCritic.load(tmp_path / "c.json")
    assert np.array_equal(d.problem.hidden_weights, c.problem.hidden_weights)
    assert d.q_offset == 0.5 and d.learn_offset and d.anneal == c.anneal
    assert q_value(d, [0.1], [0.2], 3)[0] == q_value(c, [0.1], [0.2], 3)[0]


def test_critic_validation():
    c = default_critic()
    with pytest.raises(ValueError):
        QbmCritic(c.problem, EncodingSpec([-1, -1], [1, 1], [-1], [1]), c.anneal)
    with pytest.raises(ValueError):
        QbmCritic(c.problem, c.encoding, c.anneal, backend="qpu")
    with pytest.raises(ValueError):
        QbmCritic.from_dict({"schema": "other"})


def test_diverging_update_raises():
    c = tiny_exact_critic(np.random.default_rng(6), action_dim=1)
    c = QbmCritic(c.problem, c.encoding, c.anneal, learning_rate=1e300, backend="exact")
    tr = Transition([0.4], [-0.3], 1e300, [0.0], True)
    with pytest.raises(FloatingPointError):
        td_update(c, [(tr, None)], seed=0)
