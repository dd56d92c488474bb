"""JSON round-trip for learned models (structure plus fitted CPDs).

The file layout is the Graph JSON from :mod:`.graph` extended with a
``cpds`` object keyed by node name. Floats serialize in shortest
round-trip form, so reloading reproduces parameters bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cpd import NodeCpd
from .graph import LearnedGraph, graph_from_json, graph_to_json
from .kernels import SeKernelParams

__all__ = [
    "learned_to_json",
    "learned_from_json",
    "save_learned_json",
    "load_learned_json",
]


def learned_to_json(graph: LearnedGraph, cpds: dict[int, NodeCpd],
                    extra: dict | None = None) -> dict:
    names = graph.node_names
    payload = graph_to_json(graph)
    payload["cpds"] = {
        names[node]: {
            "linear_parents": [names[p] for p in cpd.linear_parents],
            "weights": [float(w) for w in cpd.weights],
            "intercept": float(cpd.intercept),
            "gp_parents": [names[p] for p in cpd.gp_candidates],
            "amplitudes": [float(p.amplitude) for p in cpd.gp_params],
            "lengthscales": [float(p.lengthscale) for p in cpd.gp_params],
            "noise_variance": float(cpd.noise_variance),
        }
        for node, cpd in sorted(cpds.items())
    }
    if extra:
        payload.update(extra)
    return payload


def learned_from_json(payload: dict) -> tuple[LearnedGraph, dict[int, NodeCpd]]:
    graph = graph_from_json(payload)
    index = {name: i for i, name in enumerate(graph.node_names)}
    cpds: dict[int, NodeCpd] = {}
    for name, entry in payload.get("cpds", {}).items():
        node = index[name]
        params = [SeKernelParams(a, l)
                  for a, l in zip(entry["amplitudes"], entry["lengthscales"])]
        cpds[node] = NodeCpd(
            node=node,
            linear_parents=[index[p] for p in entry["linear_parents"]],
            weights=np.asarray(entry["weights"], dtype=np.float64),
            intercept=float(entry["intercept"]),
            gp_candidates=[index[p] for p in entry["gp_parents"]],
            gp_params=params,
            noise_variance=float(entry["noise_variance"]),
        )
    return graph, cpds


def save_learned_json(graph: LearnedGraph, cpds: dict[int, NodeCpd], path,
                      extra: dict | None = None) -> None:
    Path(path).write_text(
        json.dumps(learned_to_json(graph, cpds, extra), indent=2) + "\n"
    )


def load_learned_json(path) -> tuple[LearnedGraph, dict[int, NodeCpd]]:
    return learned_from_json(json.loads(Path(path).read_text()))
