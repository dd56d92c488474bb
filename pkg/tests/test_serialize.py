"""Tests for learned-model JSON serialization."""

import json

import numpy as np
import pytest

from semibn import (
    ExpertGraph,
    GenConfig,
    LearnedGraph,
    NodeCpd,
    SearchConfig,
    SeKernelParams,
    TrainConfig,
    gen_structure,
    learned_from_json,
    learned_to_json,
    load_learned_json,
    sample_dataset,
    save_learned_json,
    search_structure,
    total_test_loglik,
)
from semibn.graph import GpEdgeSet


def awkward_model():
    """Two nodes with floats that do not have short decimal forms."""
    linear = np.zeros((2, 2), dtype=bool)
    linear[1, 0] = True
    gp = np.zeros((2, 2), dtype=bool)
    gp[1, 0] = True
    graph = LearnedGraph(ExpertGraph(linear, ["u", "v"]), GpEdgeSet(gp))
    cpds = {
        0: NodeCpd(node=0, linear_parents=[], weights=np.empty(0), intercept=1 / 3,
                   gp_candidates=[], gp_params=[], noise_variance=0.01),
        1: NodeCpd(node=1, linear_parents=[0], weights=np.array([0.1 + 0.2]),
                   intercept=-np.pi, gp_candidates=[0],
                   gp_params=[SeKernelParams(np.exp(1.0), np.sqrt(2.0))],
                   noise_variance=2 / 7),
    }
    return graph, cpds


class TestRoundTrip:
    def test_bit_exact_floats(self, tmp_path):
        graph, cpds = awkward_model()
        path = tmp_path / "model.json"
        save_learned_json(graph, cpds, path)
        loaded_graph, loaded = load_learned_json(path)
        assert loaded_graph.node_names == ["u", "v"]
        assert np.array_equal(loaded_graph.expert.linear, graph.expert.linear)
        assert np.array_equal(loaded_graph.gp_edges.gp, graph.gp_edges.gp)
        for node in cpds:
            a, b = cpds[node], loaded[node]
            assert a.linear_parents == b.linear_parents
            assert np.array_equal(a.weights, b.weights)
            assert a.intercept == b.intercept
            assert a.gp_candidates == b.gp_candidates
            assert a.noise_variance == b.noise_variance
            for pa, pb in zip(a.gp_params, b.gp_params):
                assert pa.amplitude == pb.amplitude
                assert pa.lengthscale == pb.lengthscale

    def test_payload_layout(self):
        graph, cpds = awkward_model()
        payload = learned_to_json(graph, cpds, extra={"run": {"seed": 4}})
        assert set(payload["cpds"]) == {"u", "v"}
        assert payload["cpds"]["v"]["linear_parents"] == ["u"]
        assert payload["cpds"]["v"]["gp_parents"] == ["u"]
        assert payload["run"] == {"seed": 4}
        # everything JSON-native, round-trips through the text form
        text = json.dumps(payload)
        assert json.loads(text) == payload

    def test_missing_cpds_section_gives_empty_dict(self):
        graph, _ = awkward_model()
        payload = learned_to_json(graph, {})
        loaded_graph, loaded = learned_from_json(payload)
        assert loaded == {}
        assert loaded_graph.node_names == graph.node_names

    def test_unknown_node_name_rejected(self):
        graph, cpds = awkward_model()
        payload = learned_to_json(graph, cpds)
        payload["cpds"]["w"] = payload["cpds"]["v"]
        with pytest.raises(KeyError):
            learned_from_json(payload)


class TestRescoring:
    def test_reloaded_model_scores_identically(self, tmp_path):
        config = GenConfig(n=3, seed=5, n_train=70, n_val=40, n_test=30)
        truth = gen_structure(config)
        data = sample_dataset(truth, config)
        search_config = SearchConfig(
            amplitude_threshold=0.2,
            train_config=TrainConfig(max_iterations=15, patience=6),
        )
        result = search_structure(data.train, data.val, truth.expert,
                                  search_config, config.noise_variance)
        before = total_test_loglik(result.cpds, data.train, data.test)
        path = tmp_path / "learned.json"
        save_learned_json(result.graph, result.cpds, path)
        _, loaded = load_learned_json(path)
        after = total_test_loglik(loaded, data.train, data.test)
        assert after == before
