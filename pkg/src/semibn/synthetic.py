"""Random ground-truth structures and ancestral sampling.

Structures are generated edge by edge over node pairs (j, i) with j < i:
a linear edge with probability p_linear, then a GP edge with probability
p_modify when the linear edge exists (a modification) or p_add when it
does not (an addition). The two regimes differ only in p_add. Sampling
follows the structural equations: unit linear weights, zero intercepts,
cos(2 pi x) on every GP edge, Gaussian noise with known variance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .datasets import SplitDataset
from .graph import (
    ExpertGraph,
    GpEdgeSet,
    LearnedGraph,
    default_node_names,
    graph_from_json,
    graph_to_json,
)

__all__ = [
    "MODE_ID",
    "MODE_ED",
    "GenConfig",
    "GroundTruth",
    "gen_structure",
    "sample_dataset",
    "save_truth",
    "load_truth",
]

MODE_ID = "id"
MODE_ED = "ed"
_DEFAULT_P_ADD = {MODE_ID: 0.5, MODE_ED: 0.01}


@dataclass
class GenConfig:
    """Structure-generation and sampling settings for one synthetic run."""

    n: int
    mode: str = MODE_ID
    p_linear: float = 0.5
    p_modify: float = 0.5
    p_add: float | None = None
    root_variance: float = 0.01
    noise_variance: float = 0.01
    n_train: int = 500
    n_val: int = 100
    n_test: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 nodes, got {self.n}")
        if self.mode not in _DEFAULT_P_ADD:
            raise ValueError(f"mode must be '{MODE_ID}' or '{MODE_ED}', got {self.mode!r}")
        if self.p_add is None:
            self.p_add = _DEFAULT_P_ADD[self.mode]
        for name in ("p_linear", "p_modify", "p_add"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        for name in ("root_variance", "noise_variance"):
            value = getattr(self, name)
            if not (value > 0.0 and np.isfinite(value)):
                raise ValueError(f"{name} must be finite and > 0, got {value}")
        for name in ("n_train", "n_val", "n_test"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class GroundTruth:
    """True structure: expert linear edges plus GP edges, both strictly
    lower-triangular (parents have lower node index than children).

    Parameters are fixed by convention: every linear weight is 1, every
    intercept 0, every GP edge contributes cos(2 pi x_parent).
    """

    expert: ExpertGraph
    gp: GpEdgeSet

    def __post_init__(self):
        if np.triu(self.expert.linear).any() or np.triu(self.gp.gp).any():
            raise ValueError("ground-truth edges must point from lower to higher index")
        # also checks shape agreement and the (trivially satisfied) union DAG
        LearnedGraph(self.expert, self.gp)

    def learned_view(self) -> LearnedGraph:
        return LearnedGraph(self.expert, self.gp)

    def oracle_params(self) -> dict[int, tuple[np.ndarray, float]]:
        """True mean parameters per node: unit weights, zero intercept."""
        return {i: (np.ones(len(self.expert.parents(i))), 0.0)
                for i in range(self.expert.n)}

    @property
    def modification_count(self) -> int:
        return int((self.gp.gp & self.expert.linear).sum())

    @property
    def addition_count(self) -> int:
        return int((self.gp.gp & ~self.expert.linear.astype(bool)).sum())


def _substreams(seed: int) -> list[np.random.SeedSequence]:
    # fixed spawn layout: structure, train, val, test
    return np.random.SeedSequence(seed).spawn(4)


def gen_structure(config: GenConfig) -> GroundTruth:
    """Draw a random ground-truth structure for the configured regime.

    Both uniforms per node pair are always drawn, so the linear decision
    never shifts the GP decision's position in the stream.
    """
    rng = np.random.default_rng(_substreams(config.seed)[0])
    n = config.n
    linear = np.zeros((n, n), dtype=np.int8)
    gp = np.zeros((n, n), dtype=np.int8)
    for i in range(1, n):
        for j in range(i):
            u_linear, u_gp = rng.random(2)
            has_linear = u_linear < config.p_linear
            p_gp = config.p_modify if has_linear else config.p_add
            linear[i, j] = has_linear
            gp[i, j] = u_gp < p_gp
    return GroundTruth(
        expert=ExpertGraph(linear=linear, node_names=default_node_names(n)),
        gp=GpEdgeSet(gp=gp),
    )


def _sample_block(truth: GroundTruth, config: GenConfig, rng, size: int) -> np.ndarray:
    data = np.empty((size, truth.expert.n))
    noise_std = np.sqrt(config.noise_variance)
    root_std = np.sqrt(config.root_variance)
    for i in range(truth.expert.n):
        linear_parents = truth.expert.parents(i)
        gp_parents = truth.gp.parents(i)
        if not linear_parents and not gp_parents:
            data[:, i] = rng.normal(0.0, root_std, size)
            continue
        mean = data[:, linear_parents].sum(axis=1)
        if gp_parents:
            mean = mean + np.cos(2.0 * np.pi * data[:, gp_parents]).sum(axis=1)
        data[:, i] = mean + rng.normal(0.0, noise_std, size)
    return data


def sample_dataset(truth: GroundTruth, config: GenConfig) -> SplitDataset:
    """Ancestral sampling of independent train/validation/test blocks,
    each from its own substream of the configured seed."""
    streams = _substreams(config.seed)
    sizes = (config.n_train, config.n_val, config.n_test)
    blocks = [_sample_block(truth, config, np.random.default_rng(stream), size)
              for stream, size in zip(streams[1:], sizes)]
    return SplitDataset(train=blocks[0], val=blocks[1], test=blocks[2],
                        node_names=list(truth.expert.node_names))


def save_truth(truth: GroundTruth, config: GenConfig, path) -> None:
    """Graph JSON plus a ``generator`` echo of the full configuration."""
    payload = graph_to_json(truth.learned_view())
    payload["generator"] = asdict(config)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_truth(path) -> tuple[GroundTruth, GenConfig | None]:
    payload = json.loads(Path(path).read_text())
    learned = graph_from_json(payload)
    truth = GroundTruth(expert=learned.expert, gp=learned.gp_edges)
    echo = payload.get("generator")
    config = GenConfig(**echo) if echo is not None else None
    return truth, config
