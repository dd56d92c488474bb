"""Graph types and structural metrics for semi-parametric Bayesian networks.

A network is described by two binary adjacency matrices over the same nodes:
``linear`` holds the expert-specified linear edges and ``gp`` holds the
nonlinear (Gaussian-process) edges. Entry ``(i, j) == 1`` means an edge from
node ``j`` into node ``i``, i.e. rows index children and columns index
parents. Node indices are 0-based internally; file formats use the 1-based
display names ``X1..Xn``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CycleError",
    "ExpertGraph",
    "GpEdgeSet",
    "LearnedGraph",
    "leaf_eligible",
    "shd",
    "validate_dag",
    "graph_to_json",
    "graph_from_json",
    "save_graph_json",
    "load_graph_json",
    "graph_to_dot",
]


class CycleError(ValueError):
    """A graph that must be acyclic contains a directed cycle."""


def default_node_names(n: int) -> list[str]:
    return [f"X{i + 1}" for i in range(n)]


def _as_adjacency(matrix, what: str) -> np.ndarray:
    mat = np.asarray(matrix, dtype=np.int8)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{what} matrix must be square, got shape {mat.shape}")
    if not np.isin(mat, (0, 1)).all():
        raise ValueError(f"{what} matrix must be binary")
    if np.diagonal(mat).any():
        raise ValueError(f"{what} matrix has a nonzero diagonal (self-loop)")
    return mat


def _find_cycle(adjacency: np.ndarray) -> tuple[int, ...] | None:
    """Return one directed cycle as a node tuple, or None if the graph is a DAG.

    ``adjacency[i, j] == 1`` means edge j -> i. Iterative DFS over the
    child relation; a back edge closes the reported cycle.
    """
    n = adjacency.shape[0]
    children = [np.flatnonzero(adjacency[:, j]) for j in range(n)]
    color = [0] * n  # 0 unvisited, 1 on stack, 2 done
    parent = [-1] * n
    for start in range(n):
        if color[start]:
            continue
        stack = [(start, 0)]
        color[start] = 1
        while stack:
            node, idx = stack[-1]
            if idx < len(children[node]):
                stack[-1] = (node, idx + 1)
                child = int(children[node][idx])
                if color[child] == 0:
                    color[child] = 1
                    parent[child] = node
                    stack.append((child, 0))
                elif color[child] == 1:
                    cycle = [node]
                    while cycle[-1] != child:
                        cycle.append(parent[cycle[-1]])
                    cycle.reverse()
                    return tuple(cycle)
            else:
                color[node] = 2
                stack.pop()
    return None


@dataclass
class ExpertGraph:
    """Linear edges specified by domain experts; a hard structural constraint.

    ``linear[i, j] == 1`` means a linear edge from node j into node i.
    """

    linear: np.ndarray
    node_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.linear = _as_adjacency(self.linear, "linear")
        if not self.node_names:
            self.node_names = default_node_names(self.n)
        if len(self.node_names) != self.n:
            raise ValueError(
                f"expected {self.n} node names, got {len(self.node_names)}"
            )
        cycle = _find_cycle(self.linear)
        if cycle is not None:
            raise CycleError(f"expert graph has a cycle: {_cycle_text(cycle, self.node_names)}")

    @property
    def n(self) -> int:
        return self.linear.shape[0]

    @classmethod
    def empty(cls, n: int, node_names: Sequence[str] | None = None) -> "ExpertGraph":
        return cls(np.zeros((n, n), dtype=np.int8), list(node_names or []))

    def parents(self, node: int) -> tuple[int, ...]:
        """Linear parents of ``node``, ascending."""
        return tuple(int(j) for j in np.flatnonzero(self.linear[node]))

    def children(self, node: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.linear[:, node]))

    def has_edge(self, parent: int, child: int) -> bool:
        return bool(self.linear[child, parent])

    def descendants(self, node: int) -> set[int]:
        """All nodes reachable from ``node`` along linear edges."""
        seen: set[int] = set()
        frontier = [node]
        while frontier:
            current = frontier.pop()
            for child in self.children(current):
                if child not in seen:
                    seen.add(child)
                    frontier.append(child)
        return seen


@dataclass
class GpEdgeSet:
    """Nonlinear (GP) edges, learned or ground truth.

    ``gp[i, j] == 1`` means a GP edge from node j into node i.
    """

    gp: np.ndarray

    def __post_init__(self):
        self.gp = _as_adjacency(self.gp, "gp")

    @property
    def n(self) -> int:
        return self.gp.shape[0]

    @classmethod
    def empty(cls, n: int) -> "GpEdgeSet":
        return cls(np.zeros((n, n), dtype=np.int8))

    def parents(self, node: int) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.gp[node]))


@dataclass
class LearnedGraph:
    """An expert graph plus the learned GP edges on top of it.

    The expert's linear edges are always part of the structure; the union of
    both edge sets must be acyclic.
    """

    expert: ExpertGraph
    gp_edges: GpEdgeSet

    def __post_init__(self):
        if self.expert.n != self.gp_edges.n:
            raise ValueError(
                f"node count mismatch: expert has {self.expert.n}, "
                f"gp edge set has {self.gp_edges.n}"
            )
        cycle = validate_dag(self.expert, self.gp_edges)
        if cycle is not None:
            raise CycleError(
                "union of linear and gp edges has a cycle: "
                + _cycle_text(cycle, self.expert.node_names)
            )

    @property
    def n(self) -> int:
        return self.expert.n

    @property
    def node_names(self) -> list[str]:
        return self.expert.node_names

    def union_matrix(self) -> np.ndarray:
        return (self.expert.linear | self.gp_edges.gp).astype(np.int8)


def _cycle_text(cycle: tuple[int, ...], names: Sequence[str]) -> str:
    return " -> ".join(names[i] for i in cycle) + f" -> {names[cycle[0]]}"


def leaf_eligible(expert: ExpertGraph, subset: Iterable[int]) -> set[int]:
    """Nodes of ``subset`` that may be placed last among ``subset``.

    A node is eligible iff it has no expert linear edge into another member
    of ``subset``; only such nodes can close an ordering of the subset
    without an expert edge pointing forward.
    """
    members = set(int(x) for x in subset)
    if not members:
        raise ValueError("subset must be nonempty")
    if not members <= set(range(expert.n)):
        raise ValueError(f"subset {sorted(members)} out of range for n={expert.n}")
    eligible = set()
    for x in members:
        if not any(y in members for y in expert.children(x)):
            eligible.add(x)
    return eligible


def shd(a: LearnedGraph, b: LearnedGraph) -> int:
    """Structural Hamming distance over typed (linear / gp) edge sets.

    Counts edge additions and removals, with an opposite-direction pair of
    the same kind counted once as a reversal. Symmetric in its arguments.
    """
    if a.n != b.n:
        raise ValueError(f"graph size mismatch: {a.n} vs {b.n}")
    total = 0
    for mat_a, mat_b in ((a.expert.linear, b.expert.linear), (a.gp_edges.gp, b.gp_edges.gp)):
        for i in range(a.n):
            for j in range(i + 1, a.n):
                fwd_a, bwd_a = mat_a[i, j], mat_a[j, i]
                fwd_b, bwd_b = mat_b[i, j], mat_b[j, i]
                if fwd_a != fwd_b and bwd_a != bwd_b and fwd_a != bwd_a:
                    total += 1  # the pair swaps direction: one reversal
                else:
                    total += int(fwd_a != fwd_b) + int(bwd_a != bwd_b)
    return total


def validate_dag(expert: ExpertGraph, gp: GpEdgeSet) -> tuple[int, ...] | None:
    """Check that linear and gp edges together form a DAG.

    Returns None when the union is acyclic, otherwise one violating cycle
    as a tuple of node indices.
    """
    if expert.n != gp.n:
        raise ValueError(f"node count mismatch: {expert.n} vs {gp.n}")
    return _find_cycle(expert.linear | gp.gp)


# -- file formats -------------------------------------------------------------

def _edge_names(matrix: np.ndarray, names: Sequence[str]) -> list[list[str]]:
    parents, children = np.nonzero(matrix.T)
    return [[names[p], names[c]] for p, c in zip(parents.tolist(), children.tolist())]


def graph_to_json(graph: LearnedGraph) -> dict:
    """Serializable dict: node names plus [parent, child] name pairs per kind."""
    names = graph.node_names
    return {
        "nodes": list(names),
        "linear_edges": _edge_names(graph.expert.linear, names),
        "gp_edges": _edge_names(graph.gp_edges.gp, names),
    }


def graph_from_json(payload: dict) -> LearnedGraph:
    """Inverse of :func:`graph_to_json`; unknown keys are ignored."""
    names = list(payload["nodes"])
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    linear = np.zeros((n, n), dtype=np.int8)
    gp = np.zeros((n, n), dtype=np.int8)
    for matrix, key in ((linear, "linear_edges"), (gp, "gp_edges")):
        for parent, child in payload.get(key, []):
            try:
                matrix[index[child], index[parent]] = 1
            except KeyError as exc:
                raise ValueError(f"edge references unknown node {exc} in {key}") from None
    return LearnedGraph(ExpertGraph(linear, names), GpEdgeSet(gp))


def save_graph_json(graph: LearnedGraph, path, extra: dict | None = None) -> None:
    payload = graph_to_json(graph)
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_graph_json(path) -> LearnedGraph:
    return graph_from_json(json.loads(Path(path).read_text()))


def graph_to_dot(graph: LearnedGraph, name: str = "bn") -> str:
    """DOT rendering: solid arrows for linear edges, dashed ``gp`` arrows
    for GP edges."""
    lines = [f"digraph {name} {{"]
    for label in graph.node_names:
        lines.append(f'  "{label}";')
    names = graph.node_names
    for parent, child in zip(*np.nonzero(graph.expert.linear.T)):
        lines.append(f'  "{names[parent]}" -> "{names[child]}";')
    for parent, child in zip(*np.nonzero(graph.gp_edges.gp.T)):
        lines.append(
            f'  "{names[parent]}" -> "{names[child]}" [style=dashed, label="gp"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
