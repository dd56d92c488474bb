"""Structure search over GP additions to a fixed expert graph.

Each node is fitted against the full candidate set implied by a node
ordering, sub-threshold amplitudes are pruned, and an exact dynamic
program over expert-consistent orderings maximizes the summed validation
scores. A brute-force enumerator over all consistent orderings serves as
an exactness oracle; both share one memo of per-(node, candidate set)
fits, so their scores agree exactly wherever both are feasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cpd import FitResult, NodeCpd, TrainConfig, fit_node, node_marginal_loglik
from .graph import ExpertGraph, GpEdgeSet, LearnedGraph
from .validation import check_data_matrix, check_positive_scalar

__all__ = [
    "SearchConfig",
    "ScoreCache",
    "ScoreContext",
    "SearchResult",
    "prune_parents",
    "apply_pruning",
    "best_score",
    "opt_ord",
    "reconstruct",
    "search_structure",
    "brute_force_structure",
]

MAX_NODES = 26
_BRUTE_FORCE_MAX = 6


@dataclass
class SearchConfig:
    """Pruning threshold plus the per-node training configuration."""

    amplitude_threshold: float
    train_config: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        check_positive_scalar(self.amplitude_threshold, "amplitude_threshold")


def prune_parents(cpd: NodeCpd, threshold) -> list[int]:
    """GP candidates whose fitted amplitude is at or above the threshold."""
    return [c for c, p in zip(cpd.gp_candidates, cpd.gp_params)
            if p.amplitude >= threshold]


def apply_pruning(cpd: NodeCpd, threshold) -> NodeCpd:
    """CPD with sub-threshold GP components removed (no refit).

    Dropping a component is equivalent to zeroing its amplitude: its
    kernel contributes nothing to the covariance either way.
    """
    keep = [i for i, p in enumerate(cpd.gp_params) if p.amplitude >= threshold]
    return NodeCpd(
        node=cpd.node,
        linear_parents=list(cpd.linear_parents),
        weights=cpd.weights.copy(),
        intercept=cpd.intercept,
        gp_candidates=[cpd.gp_candidates[i] for i in keep],
        gp_params=[cpd.gp_params[i] for i in keep],
        noise_variance=cpd.noise_variance,
    )


def _mask_of(nodes) -> int:
    mask = 0
    for x in nodes:
        mask |= 1 << int(x)
    return mask


def _nodes_of(mask: int) -> list[int]:
    out = []
    x = 0
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return out


class ScoreCache:
    """Best DP score and chosen leaf per node subset (bitmask keyed)."""

    def __init__(self, n: int):
        if n > MAX_NODES:
            raise ValueError(f"subset DP supports at most {MAX_NODES} nodes, got {n}")
        self.n = n
        self._entries: dict[int, tuple[float, int | None]] = {0: (0.0, None)}

    def __contains__(self, mask: int) -> bool:
        return mask in self._entries

    def __getitem__(self, mask: int) -> tuple[float, int | None]:
        return self._entries[mask]

    def store(self, mask: int, score: float, leaf: int | None):
        self._entries[mask] = (score, leaf)

    def __len__(self) -> int:
        return len(self._entries)


class ScoreContext:
    """Shared data, config, and fit memo for one structure search.

    The memo is keyed on (node, candidate-set bitmask) so identical fits
    are reused across DP subsets, orderings, and the brute-force oracle.
    ``fit_count`` counts actual optimizations, not memo hits.
    """

    def __init__(self, data_train, data_val, expert: ExpertGraph, config: SearchConfig,
                 noise_variances, oracle_params=None):
        self.expert = expert
        self.data_train = check_data_matrix(data_train, n_columns=expert.n, name="train data")
        self.data_val = check_data_matrix(data_val, n_columns=expert.n, name="validation data")
        self.config = config
        noise = np.asarray(noise_variances, dtype=np.float64)
        if noise.ndim == 0:
            noise = np.full(expert.n, float(noise))
        if noise.shape != (expert.n,) or not (np.isfinite(noise).all() and (noise > 0).all()):
            raise ValueError("noise_variances must be a positive scalar or per-node vector")
        self.noise_variances = noise
        self.oracle_params = oracle_params
        self.memo: dict[tuple[int, int], tuple[float, NodeCpd, FitResult]] = {}
        self.fit_count = 0
        # child bitmasks for O(1) leaf-eligibility tests
        self.child_masks = [_mask_of(expert.children(x)) for x in range(expert.n)]

    def eligible_leaves(self, mask: int) -> list[int]:
        return [x for x in _nodes_of(mask) if self.child_masks[x] & mask == 0]

    def score_leaf(self, x: int, candidate_mask: int) -> tuple[float, NodeCpd]:
        key = (x, candidate_mask)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[0], hit[1]
        kwargs = {}
        if self.oracle_params is not None and x in self.oracle_params:
            weights, intercept = self.oracle_params[x]
            kwargs = {"oracle_weights": weights, "oracle_intercept": intercept}
        result = fit_node(
            x, self.data_train, self.data_val, self.expert, _nodes_of(candidate_mask),
            self.config.train_config, self.noise_variances[x], **kwargs,
        )
        self.fit_count += 1
        pruned = apply_pruning(result.cpd, self.config.amplitude_threshold)
        score = node_marginal_loglik(pruned, self.data_val)
        self.memo[key] = (score, pruned, result)
        return score, pruned


def best_score(subset, x: int, context: ScoreContext) -> float:
    """Validation score of node x fitted against candidates subset minus x,
    after amplitude pruning. Memoized on (x, candidate set)."""
    mask = subset if isinstance(subset, int) else _mask_of(subset)
    if not mask & (1 << x):
        raise ValueError(f"node {x} not in subset")
    score, _ = context.score_leaf(x, mask & ~(1 << x))
    return score


def opt_ord(subset, context: ScoreContext, cache: ScoreCache) -> float:
    """Best summed score over expert-consistent orderings of the subset.

    Recurrence: max over leaf-eligible x of opt_ord(subset minus x) plus
    best_score(subset, x); ties go to the lower node index. The chosen
    leaf per subset is recorded in the cache for reconstruction.
    """
    mask = subset if isinstance(subset, int) else _mask_of(subset)
    if mask in cache:
        return cache[mask][0]
    best = -np.inf
    best_leaf = None
    for x in context.eligible_leaves(mask):
        rest = mask & ~(1 << x)
        total = opt_ord(rest, context, cache) + best_score(mask, x, context)
        if total > best:
            best = total
            best_leaf = x
    if best_leaf is None:
        raise RuntimeError("no eligible leaf; expert graph is not a DAG over the subset")
    cache.store(mask, best, best_leaf)
    return best


def reconstruct(cache: ScoreCache, full_set, context: ScoreContext) -> tuple[LearnedGraph, dict[int, NodeCpd]]:
    """Walk stored leaves from the full set down to the empty set and
    reassemble each node's retained GP parents."""
    mask = full_set if isinstance(full_set, int) else _mask_of(full_set)
    n = context.expert.n
    gp = np.zeros((n, n), dtype=np.int8)
    cpds: dict[int, NodeCpd] = {}
    while mask:
        if mask not in cache:
            raise RuntimeError(f"missing cache entry for subset mask {mask:b}")
        _, leaf = cache[mask]
        rest = mask & ~(1 << leaf)
        _, pruned = context.score_leaf(leaf, rest)
        cpds[leaf] = pruned
        for parent in pruned.gp_candidates:
            gp[leaf, parent] = 1
        mask = rest
    graph = LearnedGraph(expert=context.expert, gp_edges=GpEdgeSet(gp=gp))
    return graph, cpds


@dataclass
class SearchResult:
    """Learned structure, its DP score, and the per-node pruned CPDs."""

    score: float
    graph: LearnedGraph
    cpds: dict[int, NodeCpd]
    cache: ScoreCache
    context: ScoreContext


def search_structure(data_train, data_val, expert: ExpertGraph, config: SearchConfig,
                     noise_variances, oracle_params=None) -> SearchResult:
    """Exact DP structure search over all expert-consistent orderings."""
    context = ScoreContext(data_train, data_val, expert, config, noise_variances,
                           oracle_params)
    cache = ScoreCache(expert.n)
    full = (1 << expert.n) - 1
    score = opt_ord(full, context, cache)
    graph, cpds = reconstruct(cache, full, context)
    return SearchResult(score=score, graph=graph, cpds=cpds, cache=cache, context=context)


def _consistent_orderings(expert: ExpertGraph):
    """All total orderings of the nodes consistent with the expert DAG,
    in lexicographic order."""
    n = expert.n
    parent_masks = [_mask_of(expert.parents(x)) for x in range(n)]
    ordering: list[int] = []

    def extend(placed: int):
        if len(ordering) == n:
            yield tuple(ordering)
            return
        for x in range(n):
            bit = 1 << x
            if placed & bit or parent_masks[x] & ~placed:
                continue
            ordering.append(x)
            yield from extend(placed | bit)
            ordering.pop()

    yield from extend(0)


def brute_force_structure(data_train, data_val, expert: ExpertGraph, config: SearchConfig,
                          noise_variances, oracle_params=None,
                          context: ScoreContext | None = None) -> tuple[float, LearnedGraph]:
    """Exhaustive oracle: score every expert-consistent total ordering.

    Feasible only for small n; shares the fit memo with the DP when given
    the same context, making score agreement exact rather than approximate.
    """
    if expert.n > _BRUTE_FORCE_MAX:
        raise ValueError(
            f"brute force enumeration refuses n > {_BRUTE_FORCE_MAX}, got {expert.n}"
        )
    if context is None:
        context = ScoreContext(data_train, data_val, expert, config, noise_variances,
                               oracle_params)
    best = -np.inf
    best_cpds: dict[int, NodeCpd] | None = None
    for ordering in _consistent_orderings(expert):
        total = 0.0
        cpds: dict[int, NodeCpd] = {}
        placed = 0
        for x in ordering:
            score, pruned = context.score_leaf(x, placed)
            total += score
            cpds[x] = pruned
            placed |= 1 << x
        if total > best:
            best = total
            best_cpds = cpds
    if best_cpds is None:
        raise RuntimeError("no consistent ordering; expert graph is not a DAG")
    n = expert.n
    gp = np.zeros((n, n), dtype=np.int8)
    for x, cpd in best_cpds.items():
        for parent in cpd.gp_candidates:
            gp[x, parent] = 1
    return best, LearnedGraph(expert=expert, gp_edges=GpEdgeSet(gp=gp))
