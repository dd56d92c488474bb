"""Linear-Gaussian Bayesian network baseline.

Structure comes from greedy BIC hill-climbing over single-edge additions,
deletions, and reversals; parameters are per-node least squares with
maximum-likelihood residual variances. Serves both as the linear-only
comparison model and as the source of the expert graph (and per-node
noise variances) in the real-data protocol.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import (
    ExpertGraph,
    GpEdgeSet,
    LearnedGraph,
    _find_cycle,
    graph_from_json,
    graph_to_json,
)
from .validation import check_data_matrix

__all__ = ["LgbnModel", "fit_expert_graph", "lgbn_test_loglik",
           "save_lgbn_json", "load_lgbn_json"]

LOG_2PI = float(np.log(2.0 * np.pi))

# MLE residual variances can hit zero on degenerate (perfectly collinear)
# data; a tiny floor keeps log-densities finite.
_VARIANCE_FLOOR = 1e-12
_MAX_MOVES = 500


@dataclass
class LgbnModel:
    """Fitted linear-Gaussian network: DAG plus per-node OLS parameters."""

    graph: ExpertGraph
    weights: dict[int, np.ndarray]
    intercepts: np.ndarray
    residual_variances: np.ndarray

    def __post_init__(self):
        n = self.graph.n
        self.intercepts = np.asarray(self.intercepts, dtype=np.float64)
        self.residual_variances = np.asarray(self.residual_variances, dtype=np.float64)
        if self.intercepts.shape != (n,) or self.residual_variances.shape != (n,):
            raise ValueError("per-node parameter vectors must have one entry per node")
        if (self.residual_variances <= 0.0).any():
            raise ValueError("residual variances must be positive")
        for i in range(n):
            if len(self.weights.get(i, ())) != len(self.graph.parents(i)):
                raise ValueError(f"weight count mismatch at node {i}")

    def node_residual(self, data, node: int) -> np.ndarray:
        data = np.asarray(data, dtype=np.float64)
        parents = self.graph.parents(node)
        return (data[:, node] - data[:, parents] @ self.weights[node]
                - self.intercepts[node])


def _node_fit(data, node, parents):
    """OLS fit of one node on its parents; returns (loglik, penalty-free
    parameters). The BIC contribution is loglik minus (p+2)/2 * log N."""
    y = data[:, node]
    x = data[:, list(parents)]
    design = np.column_stack([x, np.ones(y.size)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ coef
    variance = max(float(np.mean(residual * residual)), _VARIANCE_FLOOR)
    loglik = -0.5 * y.size * (np.log(variance) + LOG_2PI + 1.0)
    return loglik, coef[:-1], float(coef[-1]), variance


def _bic_term(data, node, parents) -> float:
    loglik, *_ = _node_fit(data, node, parents)
    return loglik - 0.5 * (len(parents) + 2) * np.log(data.shape[0])


def _candidate_moves(adjacency: np.ndarray):
    """All single-edge moves in a fixed deterministic order."""
    n = adjacency.shape[0]
    for parent in range(n):
        for child in range(n):
            if parent == child:
                continue
            if adjacency[child, parent]:
                yield ("delete", parent, child)
                yield ("reverse", parent, child)
            else:
                yield ("add", parent, child)


def fit_expert_graph(data, node_names=None, max_moves: int = _MAX_MOVES) -> LgbnModel:
    """Greedy BIC hill-climbing from the empty graph.

    Moves are scanned in a fixed lexicographic order and the best strictly
    improving one is applied per round, so the result is deterministic.
    Constant columns are rejected; drop them first.
    """
    data = check_data_matrix(data, name="data")
    n = data.shape[1]
    if n < 2:
        raise ValueError("need at least two columns")
    if (np.ptp(data, axis=0) == 0.0).any():
        constant = [i for i in range(n) if np.ptp(data[:, i]) == 0.0]
        raise ValueError(
            f"constant column(s) {constant}: drop them before fitting "
            "(the real-data preparation step does this)"
        )

    adjacency = np.zeros((n, n), dtype=np.int8)
    node_scores = np.array([_bic_term(data, i, ()) for i in range(n)])

    for _ in range(max_moves):
        best_gain = 0.0
        best_move = None
        best_scores = None
        for kind, parent, child in _candidate_moves(adjacency):
            trial = adjacency.copy()
            if kind == "add":
                trial[child, parent] = 1
            elif kind == "delete":
                trial[child, parent] = 0
            else:
                trial[child, parent] = 0
                trial[parent, child] = 1
            if kind != "delete" and _find_cycle(trial) is not None:
                continue
            changed = {child} if kind != "reverse" else {child, parent}
            gain = 0.0
            new_scores = {}
            for node in changed:
                parents = tuple(np.nonzero(trial[node])[0])
                score = _bic_term(data, node, parents)
                gain += score - node_scores[node]
                new_scores[node] = score
            if gain > best_gain:
                best_gain = gain
                best_move = (kind, parent, child, trial)
                best_scores = new_scores
        if best_move is None:
            break
        adjacency = best_move[3]
        for node, score in best_scores.items():
            node_scores[node] = score

    names = list(node_names) if node_names is not None else []
    graph = ExpertGraph(linear=adjacency, node_names=names)
    weights = {}
    intercepts = np.empty(n)
    variances = np.empty(n)
    for i in range(n):
        _, w, b, var = _node_fit(data, i, graph.parents(i))
        weights[i] = w
        intercepts[i] = b
        variances[i] = var
    return LgbnModel(graph=graph, weights=weights, intercepts=intercepts,
                     residual_variances=variances)


def lgbn_test_loglik(model: LgbnModel, data_test) -> float:
    """Total Gaussian log-density of test rows under the fitted model."""
    data_test = check_data_matrix(data_test, n_columns=model.graph.n,
                                  allow_empty=True, name="test data")
    if data_test.shape[0] == 0:
        return 0.0
    total = 0.0
    for i in range(model.graph.n):
        residual = model.node_residual(data_test, i)
        variance = model.residual_variances[i]
        total += -0.5 * (float(residual @ residual) / variance
                         + residual.size * (np.log(variance) + LOG_2PI))
    return total


def save_lgbn_json(model: LgbnModel, path) -> None:
    """Graph JSON (empty GP set) extended with fitted per-node parameters,
    ready to serve as an expert-graph input with known noise variances."""
    names = model.graph.node_names
    payload = graph_to_json(LearnedGraph(model.graph, GpEdgeSet.empty(model.graph.n)))
    payload["noise_variances"] = {names[i]: float(model.residual_variances[i])
                                  for i in range(model.graph.n)}
    payload["weights"] = {names[i]: [float(w) for w in model.weights[i]]
                          for i in range(model.graph.n)}
    payload["intercepts"] = {names[i]: float(model.intercepts[i])
                             for i in range(model.graph.n)}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_lgbn_json(path) -> LgbnModel:
    payload = json.loads(Path(path).read_text())
    learned = graph_from_json(payload)
    graph = learned.expert
    names = graph.node_names
    weights = {i: np.asarray(payload["weights"][names[i]], dtype=np.float64)
               for i in range(graph.n)}
    intercepts = np.array([payload["intercepts"][name] for name in names])
    variances = np.array([payload["noise_variances"][name] for name in names])
    return LgbnModel(graph=graph, weights=weights, intercepts=intercepts,
                     residual_variances=variances)
