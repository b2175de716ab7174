"""Chimera hidden-node graphs and the Ising data of a clamped QBM.

Node indexing is row-major over unit cells. Inside cell ``c = row * cols + col``
nodes ``8c .. 8c+3`` form side A and ``8c+4 .. 8c+7`` form side B. Side-A nodes
couple to the matching side-A node of the cell to the right, side-B nodes to the
matching side-B node of the cell below.
"""

from __future__ import annotations

import copy
import functools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CELL_SIZE = 8
HALF_CELL = 4


@dataclass(frozen=True)
class HiddenGraph:
    """Any hidden-node graph; tests and exact oracles use tiny ones."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    side_of: tuple[str, ...]

    def __post_init__(self):
        if len(self.side_of) != self.n_nodes:
            raise ValueError("side_of must label every node")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edges")
        for j, k in self.edges:
            if not 0 <= j < k < self.n_nodes:
                raise ValueError(f"edge ({j}, {k}) must satisfy 0 <= j < k < n_nodes")

    @property
    def qubit_count(self) -> int:
        return self.n_nodes

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def side_nodes(self, side: str) -> list[int]:
        return [j for j, s in enumerate(self.side_of) if s == side]

    def edge_array(self) -> np.ndarray:
        return np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    def to_dict(self) -> dict:
        return {"n_hidden": self.n_nodes, "edges": [list(e) for e in self.edges], "side_of": "".join(self.side_of)}


@dataclass(frozen=True)
class ChimeraTopology(HiddenGraph):
    rows: int = 1
    cols: int = 1

    def to_dict(self) -> dict:
        return {"rows": self.rows, "cols": self.cols}


def small_graph(n_nodes: int, edges=(), side_of=None) -> HiddenGraph:
    edges = tuple(sorted((min(j, k), max(j, k)) for j, k in edges))
    side_of = tuple(side_of) if side_of is not None else ("A",) * n_nodes
    return HiddenGraph(n_nodes=n_nodes, edges=edges, side_of=side_of)


def bipartite_graph(n_a: int, n_b: int) -> HiddenGraph:
    """Complete bipartite graph: nodes ``0..n_a-1`` on side A, the rest on side B."""
    if n_a < 1 or n_b < 1:
        raise ValueError("both sides need at least one node")
    edges = [(j, n_a + k) for j in range(n_a) for k in range(n_b)]
    return small_graph(n_a + n_b, edges, ("A",) * n_a + ("B",) * n_b)


def graph_from_dict(doc: dict) -> HiddenGraph:
    if "rows" in doc:
        return build_chimera(doc["rows"], doc["cols"])
    return small_graph(doc["n_hidden"], [tuple(e) for e in doc["edges"]], doc.get("side_of"))


def build_chimera(rows: int, cols: int) -> ChimeraTopology:
    """Build a ``rows x cols`` grid of K(4,4) cells."""
    if int(rows) != rows or int(cols) != cols or rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be positive integers, got {rows}x{cols}")
    rows, cols = int(rows), int(cols)

    def node(r: int, c: int, k: int) -> int:
        return (r * cols + c) * CELL_SIZE + k

    edges: list[tuple[int, int]] = []
    for r in range(rows):
        for c in range(cols):
            for a in range(HALF_CELL):
                for b in range(HALF_CELL):
                    edges.append((node(r, c, a), node(r, c, HALF_CELL + b)))
            if c + 1 < cols:
                for a in range(HALF_CELL):
                    edges.append((node(r, c, a), node(r, c + 1, a)))
            if r + 1 < rows:
                for b in range(HALF_CELL, CELL_SIZE):
                    edges.append((node(r, c, b), node(r + 1, c, b)))
    edges.sort()
    side_of = tuple("A" if k % CELL_SIZE < HALF_CELL else "B" for k in range(rows * cols * CELL_SIZE))
    return ChimeraTopology(n_nodes=rows * cols * CELL_SIZE, edges=tuple(edges), side_of=side_of, rows=rows, cols=cols)


@dataclass(frozen=True)
class VisibleMapping:
    state_dim: int
    action_dim: int
    targets: tuple[tuple[int, ...], ...]

    @property
    def n_visible(self) -> int:
        return self.state_dim + self.action_dim

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i, hidden in enumerate(self.targets) for j in hidden]

    def mask(self, n_hidden: int) -> np.ndarray:
        return _mask_of(self, n_hidden).copy()


@functools.lru_cache(maxsize=64)
def _mask_of(mapping: VisibleMapping, n_hidden: int) -> np.ndarray:
    m = np.zeros((mapping.n_visible, n_hidden), dtype=bool)
    for i, j in mapping.pairs():
        m[i, j] = True
    m.setflags(write=False)
    return m


def default_visible_mapping(topology: HiddenGraph, state_dim: int, action_dim: int) -> VisibleMapping:
    """State units bias every side-A node, action units every side-B node.

    On graphs without a side-B node (tiny oracle graphs) every unit biases every node.
    """
    if state_dim < 1 or action_dim < 1:
        raise ValueError("state_dim and action_dim must be >= 1")
    side_a = tuple(topology.side_nodes("A"))
    side_b = tuple(topology.side_nodes("B"))
    if not side_a or not side_b:
        side_a = side_b = tuple(range(topology.qubit_count))
    targets = (side_a,) * state_dim + (side_b,) * action_dim
    return VisibleMapping(state_dim=state_dim, action_dim=action_dim, targets=targets)


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """Couplings and clamped biases of one QBM instance.

    ``hidden_weights[e]`` is the coupling of ``topology.edges[e]``;
    ``visible_weights`` is dense ``(n_visible, n_hidden)`` and zero outside the mapping.
    """

    topology: HiddenGraph
    mapping: VisibleMapping
    hidden_weights: np.ndarray
    visible_weights: np.ndarray
    visible_values: np.ndarray | None = None
    _mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n_hidden = self.topology.qubit_count
        hw = np.array(self.hidden_weights, dtype=np.float64)
        vw = np.array(self.visible_weights, dtype=np.float64)
        if hw.shape != (self.topology.n_edges,):
            raise ValueError(f"hidden_weights must have shape ({self.topology.n_edges},), got {hw.shape}")
        if vw.shape != (self.mapping.n_visible, n_hidden):
            raise ValueError(f"visible_weights must have shape {(self.mapping.n_visible, n_hidden)}, got {vw.shape}")
        mask = self.mapping.mask(n_hidden)
        if np.any(vw[~mask] != 0.0):
            raise ValueError("visible_weights has entries outside the visible mapping")
        if not (np.all(np.isfinite(hw)) and np.all(np.isfinite(vw))):
            raise ValueError("weights must be finite")
        hw.setflags(write=False)
        vw.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "hidden_weights", hw)
        object.__setattr__(self, "visible_weights", vw)
        object.__setattr__(self, "_mask", mask)
        if self.visible_values is not None:
            v = np.array(self.visible_values, dtype=np.float64)
            if v.shape != (self.mapping.n_visible,):
                raise ValueError(f"visible_values must have length {self.mapping.n_visible}")
            v.setflags(write=False)
            object.__setattr__(self, "visible_values", v)

    @property
    def n_hidden(self) -> int:
        return self.topology.qubit_count

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def n_weights(self) -> int:
        return self.topology.n_edges + int(self._mask.sum())

    def biases(self, visible_values=None) -> np.ndarray:
        """Per-hidden-node field ``sum_i w_ij v_i``."""
        v = self.visible_values if visible_values is None else np.asarray(visible_values, dtype=np.float64)
        if v is None:
            raise ValueError("no visible values clamped")
        return v @ self.visible_weights

    def clamp(self, visible_values) -> "IsingProblem":
        v = np.array(visible_values, dtype=np.float64)
        if v.shape != (self.mapping.n_visible,):
            raise ValueError(f"visible_values must have length {self.mapping.n_visible}")
        v.setflags(write=False)
        clamped = copy.copy(self)  # weights already validated and read-only
        object.__setattr__(clamped, "visible_values", v)
        return clamped

    def with_weights(self, hidden_weights, visible_weights) -> "IsingProblem":
        return IsingProblem(self.topology, self.mapping, hidden_weights, visible_weights, self.visible_values)

    def to_dict(self) -> dict:
        pairs = self.mapping.pairs()
        return {
            **self.topology.to_dict(),
            "state_dim": self.mapping.state_dim,
            "action_dim": self.mapping.action_dim,
            "hidden_weights": [[j, k, float(w)] for (j, k), w in zip(self.topology.edges, self.hidden_weights)],
            "visible_weights": [[i, j, float(self.visible_weights[i, j])] for i, j in pairs],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "IsingProblem":
        topo = graph_from_dict(doc)
        mapping = default_visible_mapping(topo, doc["state_dim"], doc["action_dim"])
        index = {e: n for n, e in enumerate(topo.edges)}
        hw = np.zeros(topo.n_edges)
        seen = set()
        for j, k, w in doc["hidden_weights"]:
            key = (min(j, k), max(j, k))
            if key not in index:
                raise ValueError(f"edge {key} is not part of the hidden graph")
            hw[index[key]] = w
            seen.add(key)
        if len(seen) != topo.n_edges:
            raise ValueError("hidden_weights must list every edge exactly once")
        mask = mapping.mask(topo.qubit_count)
        vw = np.zeros(mask.shape)
        listed = 0
        for i, j, w in doc["visible_weights"]:
            if not mask[i, j]:
                raise ValueError(f"visible pair ({i}, {j}) is not permitted by the mapping")
            vw[i, j] = w
            listed += 1
        if listed != int(mask.sum()):
            raise ValueError("visible_weights must list every mapped pair exactly once")
        return cls(topo, mapping, hw, vw)


def zero_problem(topology: HiddenGraph, mapping: VisibleMapping) -> IsingProblem:
    return IsingProblem(topology, mapping, np.zeros(topology.n_edges), np.zeros((mapping.n_visible, topology.qubit_count)))


def random_problem(topology: HiddenGraph, mapping: VisibleMapping, rng: np.random.Generator, scale: float = 0.1) -> IsingProblem:
    """Weights uniform in ``[-scale, scale]`` on every edge and mapped pair."""
    hw = rng.uniform(-scale, scale, topology.n_edges)
    vw = rng.uniform(-scale, scale, (mapping.n_visible, topology.qubit_count))
    vw = np.where(mapping.mask(topology.qubit_count), vw, 0.0)
    return IsingProblem(topology, mapping, hw, vw)


def save_problem(problem: IsingProblem, path) -> None:
    Path(path).write_text(json.dumps(problem.to_dict(), indent=1))


def load_problem(path) -> IsingProblem:
    return IsingProblem.from_dict(json.loads(Path(path).read_text()))
