import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ferl.topology import (IsingProblem, build_chimera, default_visible_mapping, load_problem, random_problem,
                           save_problem, small_graph, zero_problem)


def brute_force_edges(rows, cols):
    node = lambda r, c, k: (r * cols + c) * 8 + k
    edges = set()
    for r in range(rows):
        for c in range(cols):
            edges |= {(node(r, c, a), node(r, c, 4 + b)) for a in range(4) for b in range(4)}
            if c + 1 < cols:
                edges |= {(node(r, c, a), node(r, c + 1, a)) for a in range(4)}
            if r + 1 < rows:
                edges |= {(node(r, c, b), node(r + 1, c, b)) for b in range(4, 8)}
    return edges


@pytest.mark.parametrize("rows,cols,qubits,edges", [(1, 1, 8, 16), (1, 2, 16, 36), (4, 4, 128, 352)])
def test_chimera_examples(rows, cols, qubits, edges):
    t = build_chimera(rows, cols)
    assert t.qubit_count == qubits
    assert t.n_edges == edges


@pytest.mark.parametrize("rows", range(1, 5))
@pytest.mark.parametrize("cols", range(1, 5))
def test_chimera_matches_brute_force(rows, cols):
    t = build_chimera(rows, cols)
    assert set(t.edges) == brute_force_edges(rows, cols)
    assert len(t.edges) == 16 * rows * cols + 4 * (rows * (cols - 1) + cols * (rows - 1))
    assert len(set(t.edges)) == len(t.edges)
    assert all(j < k for j, k in t.edges)


@pytest.mark.parametrize("rows,cols", [(1, 1), (2, 3), (3, 2)])
def test_chimera_sides(rows, cols):
    t = build_chimera(rows, cols)
    for j, k in t.edges:
        same_cell = j // 8 == k // 8
        if same_cell:
            assert t.side_of[j] != t.side_of[k]
        else:
            assert t.side_of[j] == t.side_of[k]
            # A nodes couple horizontally (adjacent cells), B nodes vertically (cols cells apart)
            gap = k // 8 - j // 8
            assert gap == (1 if t.side_of[j] == "A" else cols)


def test_chimera_deterministic_and_rejects_zero():
    assert build_chimera(2, 2) == build_chimera(2, 2)
    with pytest.raises(ValueError):
        build_chimera(0, 2)
    with pytest.raises(ValueError):
        build_chimera(1, 0)


@pytest.mark.parametrize("rows,cols,ds,da,count", [(1, 2, 1, 1, 52), (1, 1, 1, 1, 24), (4, 4, 10, 10, 1632)])
def test_weight_counts(rows, cols, ds, da, count):
    t = build_chimera(rows, cols)
    m = default_visible_mapping(t, ds, da)
    assert zero_problem(t, m).n_weights == count


def test_default_mapping_sides():
    t = build_chimera(1, 2)
    m = default_visible_mapping(t, 2, 1)
    assert m.targets[0] == m.targets[1] == tuple(t.side_nodes("A"))
    assert m.targets[2] == tuple(t.side_nodes("B"))
    assert all(m.targets)
    with pytest.raises(ValueError):
        default_visible_mapping(t, 0, 1)


def test_problem_validation():
    t = build_chimera(1, 1)
    m = default_visible_mapping(t, 1, 1)
    with pytest.raises(ValueError):
        IsingProblem(t, m, np.zeros(3), np.zeros((2, 8)))
    vw = np.zeros((2, 8))
    vw[0, 5] = 1.0  # state unit may only touch side A (nodes 0-3)
    with pytest.raises(ValueError):
        IsingProblem(t, m, np.zeros(16), vw)
    hw = np.zeros(16)
    hw[0] = np.nan
    with pytest.raises(ValueError):
        IsingProblem(t, m, hw, np.zeros((2, 8)))


def test_problem_is_immutable():
    t = build_chimera(1, 1)
    p = zero_problem(t, default_visible_mapping(t, 1, 1))
    with pytest.raises(ValueError):
        p.hidden_weights[0] = 1.0


def test_json_round_trip(tmp_path):
    t = build_chimera(1, 2)
    p = random_problem(t, default_visible_mapping(t, 1, 1), np.random.default_rng(3), scale=1.0)
    save_problem(p, tmp_path / "p.json")
    doc = json.loads((tmp_path / "p.json").read_text())
    assert {"rows", "cols", "hidden_weights", "visible_weights", "state_dim", "action_dim"} <= set(doc)
    q = load_problem(tmp_path / "p.json")
    assert np.array_equal(q.hidden_weights, p.hidden_weights)
    assert np.array_equal(q.visible_weights, p.visible_weights)


def test_small_graph_round_trip():
    g = small_graph(3, [(2, 0), (1, 2)])
    assert g.edges == ((0, 2), (1, 2))
    p = zero_problem(g, default_visible_mapping(g, 1, 1))
    q = IsingProblem.from_dict(p.to_dict())
    assert q.topology == g


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32), st.floats(-1, 1), st.floats(-1, 1))
def test_biases_linear_in_visible(seed, s, a):
    t = build_chimera(1, 1)
    p = random_problem(t, default_visible_mapping(t, 1, 1), np.random.default_rng(seed))
    b = p.biases(np.array([s, a]))
    assert np.allclose(b, s * p.biases(np.array([1.0, 0.0])) + a * p.biases(np.array([0.0, 1.0])))


def test_bipartite_graph():
    from ferl.topology import bipartite_graph
    g = bipartite_graph(2, 3)
    assert g.n_edges == 6 and g.side_nodes("A") == [0, 1]
    p = zero_problem(g, default_visible_mapping(g, 10, 10))
    assert p.n_weights == 6 + 10 * 2 + 10 * 3
    with pytest.raises(ValueError):
        bipartite_graph(0, 2)
